#pragma once

#include <vector>

#include "conic_lmcf/link_spectrum.hpp"

namespace conic_lmcf {

struct AlphaWindow {
  double lo = -3.0;
  double hi = 3.0;
};

/// One exceptional exponent alpha in D_Sigma together with the eigenvalue of
/// -Delta_h it solves alpha (alpha + m - 2) = lambda for.
struct Exponent {
  double alpha = 0.0;
  int multiplicity = 0;
  double lambda = 0.0;
};

inline constexpr double kAnalyticTolerance = 1e-9;
inline constexpr double kMeshTolerance = 1e-4;

/// Exceptional exponents of a cone over a link, restricted to a window, and
/// the counting functions built on them.
///
/// Conventions:
///   m(alpha)  = multiplicity of lambda = alpha (alpha + m - 2), zero off D.
///   M(delta)  = -sum_{alpha in D, delta < alpha < 0} m(alpha)   (delta < 0)
///             =  sum_{alpha in D, 0 <= alpha < delta} m(alpha)  (delta >= 0)
///   n(beta)   = m(beta) + sum_{k >= 1, 2k <= beta} m(beta - 2k)
///   N(delta)  = M with m replaced by n and D by E, the set of alpha + 2k
///               with alpha in D, alpha >= 0.
/// Two exponents closer than `tolerance` are the same exponent. Queries whose
/// summation range leaves the window throw WindowTooSmall.
class ExponentTable {
 public:
  ExponentTable(int m, AlphaWindow window, std::vector<Exponent> entries,
                double tolerance = kAnalyticTolerance);

  int m() const { return m_; }
  AlphaWindow window() const { return window_; }
  double tolerance() const { return tolerance_; }
  const std::vector<Exponent>& entries() const { return entries_; }

  /// m_Sigma(alpha); zero when alpha is not in D_Sigma.
  int multiplicity(double alpha) const;
  /// alpha in D_Sigma (within tolerance).
  bool in_D(double alpha) const;
  /// beta in E_Sigma (within tolerance).
  bool in_E(double beta) const;

  int count_M(double delta) const;
  /// M with the closed interval [0, delta]; used by the stability index.
  int count_M_closed(double delta) const;
  int count_n(double beta) const;
  int count_N(double delta) const;

  /// dim V_{P_gamma}: pairs (alpha, k) with alpha in D, alpha >= 0,
  /// alpha + 2k < gamma, counted with multiplicity. Enumerated directly,
  /// independently of count_N.
  int model_space_dimension(double gamma) const;

  /// Distinct points of E_Sigma inside [0, hi] (sorted).
  std::vector<double> extended_points(double hi) const;

 private:
  void require_covered(double lo, double hi, const char* what) const;

  int m_;
  AlphaWindow window_;
  std::vector<Exponent> entries_;
  double tolerance_;
};

/// Both roots of alpha (alpha + m - 2) = lambda inside the window, for every
/// eigenvalue. The window is clipped to the range the spectrum is complete on.
ExponentTable exponents(const Spectrum& spectrum, int m, AlphaWindow window);
ExponentTable exponents(const Spectrum& spectrum, int m, AlphaWindow window, double tolerance);

}  // namespace conic_lmcf
