#include "drn/comms.hpp"

#include <cmath>
#include <queue>

namespace drn {

void CommsConfig::validate() const {
  if (!(r_max > 0.0)) throw std::invalid_argument("comms: r_max must be positive");
  if (h_max < 1) throw std::invalid_argument("comms: h_max must be >= 1");
}

std::uint64_t HopMatrix::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (int v : hops_) {
    auto bits = static_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

HopMatrix build_graph(std::span<const Vec3> positions, double r_max) {
  const int n = static_cast<int>(positions.size());
  HopMatrix hops(n);
  for (int source = 0; source < n; ++source) {
    std::queue<int> frontier;
    frontier.push(source);
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v = 0; v < n; ++v) {
        if (hops.at(source, v) != kUnreachable) continue;
        if ((positions[u] - positions[v]).norm() <= r_max) {
          hops.at(source, v) = hops.at(source, u) + 1;
          frontier.push(v);
        }
      }
    }
  }
  return hops;
}

void MeasurementHistory::push(MeasurementRecord record) {
  records_.push_back(std::move(record));
  while (static_cast<int>(records_.size()) > depth_) records_.pop_front();
}

const MeasurementRecord* MeasurementHistory::find(int emitted_at) const {
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (it->emitted_at == emitted_at) return &*it;
  }
  return nullptr;
}

std::vector<InfoVector> exchange(std::span<const MeasurementHistory> histories, const HopMatrix& hops,
                                 int k, int h_max) {
  const int n = static_cast<int>(histories.size());
  if (hops.size() != n) throw std::invalid_argument("exchange: hop matrix size mismatch");
  std::vector<InfoVector> out(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int h = hops.at(i, j);
      if (h == kUnreachable || h > h_max) continue;
      const int emitted = (h == 0) ? k : k - h + 1;
      if (emitted < 1) continue;
      const MeasurementRecord* rec = histories[j].find(emitted);
      if (rec == nullptr) continue;
      out[i].entries.push_back({*rec, h, emitted});
    }
  }
  return out;
}

}  // namespace drn
