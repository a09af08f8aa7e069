#pragma once

#include <span>
#include <string>
#include <vector>

#include "conic_lmcf/cone_heat.hpp"
#include "conic_lmcf/exponent_table.hpp"
#include "conic_lmcf/weighted_norms.hpp"

namespace conic_lmcf {

/// coefficient * r^{alpha + 2k}
struct AsymptoticTerm {
  double alpha = 0.0;
  int k = 0;
  double coefficient = 0.0;

  double exponent() const { return alpha + 2.0 * k; }
};

struct AsymptoticExpansion {
  double time = 0.0;
  std::vector<AsymptoticTerm> terms;
  /// log-log slope of the remainder u - sum(terms); NaN when the remainder
  /// is at rounding level (nothing left to fit).
  double remainder_rate = 0.0;
  double remainder_rate_error = 0.0;
  double remainder_level = 0.0;  // max |remainder| over the fit window
  std::vector<std::string> warnings;
};

struct FitOptions {
  double window_outer = 0.1;   // fit window ends at window_outer * R
  double window_decades = 2.0; // and spans this many decades inward (clipped at r_min)
  bool mode_only = true;       // basis from the solved mode's exponents, not all of D_Sigma
};

/// Basis exponents {alpha + 2k < gamma} with alpha in D_Sigma cap [0, gamma).
/// With mode_only, alpha is restricted to the roots for `lambda`: a single
/// link mode carries no other exponents.
std::vector<AsymptoticTerm> model_basis(const ExponentTable& table, double lambda, double gamma,
                                        bool mode_only = true);

/// Fits u(r) on the window against the model basis plus one free remainder
/// power r^s (separable least squares, weights r^{-gamma} on a log-uniform
/// measure), then measures the remainder u - sum(terms) on dyadic annuli.
AsymptoticExpansion fit_expansion(std::span<const double> r, std::span<const double> u, double lambda,
                                  const ExponentTable& table, double gamma, double r_outer,
                                  const FitOptions& options = {});

/// fit_expansion at every stored time after t = 0.
std::vector<AsymptoticExpansion> extract_asymptotics(const ModeSolution& sol, const ExponentTable& table,
                                                     double gamma, const FitOptions& options = {});

double evaluate_terms(std::span<const AsymptoticTerm> terms, double r);

/// Radial-mode Laplacian of sum c r^{alpha+2k}: each term maps to
/// c ((alpha+2k)(alpha+2k+m-2) - lambda) r^{alpha+2k-2}, i.e. k -> k-1.
std::vector<AsymptoticTerm> model_laplacian(std::span<const AsymptoticTerm> terms, double lambda, int m);

/// chi(rho) * v(rho) with chi = 1 on rho < cutoff / 2 and chi = 0 on rho > cutoff.
class AsymptoticExtension {
 public:
  AsymptoticExtension(std::vector<AsymptoticTerm> terms, double cutoff);
  double operator()(double rho) const;
  double cutoff() const { return cutoff_; }
  const std::vector<AsymptoticTerm>& terms() const { return terms_; }

 private:
  std::vector<AsymptoticTerm> terms_;
  double cutoff_;
};

AsymptoticExtension extend_asymptotic(std::vector<AsymptoticTerm> terms, double cutoff);

/// -sum_i M_{Sigma_i}(gamma_i). Throws ExceptionalWeight listing every
/// component with gamma_i in D_{Sigma_i}.
int fredholm_index(std::span<const ExponentTable> tables, const WeightVector& gamma);

/// Index on weighted spaces with discrete asymptotics:
/// -sum M(gamma_i) + sum (dim V_{P_{gamma_i}} - dim V_{P_{gamma_i - 2}}).
/// Requires gamma_i > 2 - m and gamma_i outside E_{Sigma_i}.
int fredholm_index_with_asymptotics(std::span<const ExponentTable> tables, const WeightVector& gamma);

}  // namespace conic_lmcf
