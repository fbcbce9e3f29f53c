#pragma once

#include <cmath>
#include <compare>
#include <string>

#include "sbq/errors.hpp"

namespace sbq {

/// Global spin cutoff for band-limited functions.
inline constexpr int kMaxTwiceSpin = 24;

/// Half-integer spin stored as 2j.
struct Spin {
  int twice = 0;

  static constexpr Spin from_twice(int tw) { return Spin{tw}; }

  /// Accepts j in {0, 1/2, 1, ...}; anything else raises parameter_domain_error.
  static Spin from_double(double j) {
    const double tw = 2.0 * j;
    const long r = std::lround(tw);
    if (r < 0 || std::abs(tw - static_cast<double>(r)) > 1e-12)
      throw parameter_domain_error("spin must be a non-negative half-integer, got " + std::to_string(j));
    return Spin{static_cast<int>(r)};
  }

  constexpr double value() const { return 0.5 * twice; }
  constexpr int dim() const { return twice + 1; }
  constexpr double casimir() const { return value() * (value() + 1.0); }

  friend constexpr auto operator<=>(const Spin&, const Spin&) = default;
};

/// Casimir eigenvalue j(j+1); the Laplacian acts on D^j as -j(j+1).
inline double casimir_eigenvalue(Spin j) { return j.casimir(); }

inline void check_spin_cutoff(Spin j, const char* where) {
  if (j.twice < 0 || j.twice > kMaxTwiceSpin)
    throw spin_cutoff_error(std::string(where) + ": spin " + std::to_string(j.value()) + " exceeds cutoff 12");
}

}  // namespace sbq
