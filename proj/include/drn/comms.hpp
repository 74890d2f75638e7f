#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <span>
#include <vector>

#include "drn/core.hpp"
#include "drn/radar.hpp"

namespace drn {

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

struct CommsConfig {
  double r_max = 900.0;  // m, single-hop radius; +inf for full connectivity
  int h_max = 1;

  void validate() const;
};

/// Shortest-path hop counts between agents; kUnreachable between components.
class HopMatrix {
 public:
  HopMatrix() = default;
  explicit HopMatrix(int size) : size_(size), hops_(size * size, kUnreachable) {
    for (int i = 0; i < size; ++i) at(i, i) = 0;
  }

  int size() const { return size_; }
  int& at(int i, int j) { return hops_[i * size_ + j]; }
  int at(int i, int j) const { return hops_[i * size_ + j]; }

  /// FNV-1a over the entries, for compact logging.
  std::uint64_t digest() const;

 private:
  int size_ = 0;
  std::vector<int> hops_;
};

/// BFS over the disc graph with edges where ||p_i - p_j|| <= r_max.
HopMatrix build_graph(std::span<const Vec3> positions, double r_max);

/// The last few records emitted by one agent, indexed by emission time.
class MeasurementHistory {
 public:
  explicit MeasurementHistory(int depth = 1) : depth_(depth < 1 ? 1 : depth) {}

  void push(MeasurementRecord record);
  const MeasurementRecord* find(int emitted_at) const;
  int depth() const { return depth_; }

 private:
  int depth_;
  std::deque<MeasurementRecord> records_;
};

struct ReceivedRecord {
  MeasurementRecord record;
  int hops = 0;
  int effective_time = 0;  // k - hops + 1
};

struct InfoVector {
  std::vector<ReceivedRecord> entries;
};

/// Agent i receives its own record at k and, for 1 <= h_ij <= h_max, agent j's record emitted at
/// k - h_ij + 1. Senders whose requested record predates the run (or the buffer) are skipped.
std::vector<InfoVector> exchange(std::span<const MeasurementHistory> histories, const HopMatrix& hops,
                                 int k, int h_max);

}  // namespace drn
