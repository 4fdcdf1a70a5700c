#pragma once

namespace cftqei {

/// Tolerances threaded explicitly through every routine that compares
/// floating-point results against a contract.
struct ToleranceSet {
  double rel = 1e-10;
  double abs = 1e-12;
  // Relative cutoff below which sqrt(G) is treated as vanishing.
  double zero_threshold = 1e-14;
  // Spectral tail (relative to the largest Fourier coefficient) above which
  // a periodic grid is declared under-resolved.
  double spectral_tail = 1e-9;
  // Gram eigenvalues below this fraction of the level maximum are null.
  double null_threshold = 1e-9;

  [[nodiscard]] bool close(double a, double b) const {
    const double scale = (a < 0 ? -a : a) + (b < 0 ? -b : b);
    const double d = a - b;
    return (d < 0 ? -d : d) <= abs + rel * scale;
  }
};

inline constexpr ToleranceSet kDefaultTolerances{};

}  // namespace cftqei
