#pragma once

#include <array>
#include <cstdint>
#include <string>

// Independent numerical checks shared by the unit tests and the acceptance binary.
namespace drn::oracle {

struct Result {
  double max_error = 0.0;  // worst relative error seen
  int instances = 0;
  double seconds = 0.0;
};

/// Tracker rows vs central differences of the observation functions (all four channels).
Result jacobian_vs_finite_differences(int instances, std::uint64_t seed);

/// [(P^- - P^- H^T S^-1 H P^-)^-1]_11 vs [P^-1]_11 + J_meas.
Result information_forms(int instances, std::uint64_t seed);

/// Each geometric matrix vs the outer product of the matching tracker row (absolute error).
Result geometric_vs_outer_products(int instances, std::uint64_t seed);

/// Scalar closed-form entries vs the matrix assembly, per entry (xx, xy, xz, yy, zz, yz).
struct ScalarReport {
  std::array<double, 6> printed{};     // max relative gap with the published xz Doppler weight
  std::array<double, 6> consistent{};  // max relative gap with the symmetric weight
  int instances = 0;
};
ScalarReport scalar_vs_matrix(int instances, std::uint64_t seed);
std::string describe(const ScalarReport& report);

/// Analytic cost gradient vs central differences of -ln det J in the own position.
Result gradient_vs_finite_differences(int instances, std::uint64_t seed);

/// max(||P^2 - P||, ||P N||) on random active sets.
Result projection_identities(int instances, std::uint64_t seed);

inline constexpr const char* kEntryNames[6] = {"xx", "xy", "xz", "yy", "zz", "yz"};

}  // namespace drn::oracle
