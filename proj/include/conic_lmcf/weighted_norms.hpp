#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"

namespace conic_lmcf {

/// One weight per conical point.
struct WeightVector {
  std::vector<double> gamma;
};

/// Radius function on a manifold with conical points, evaluated through cone
/// charts: a point of chart i at cone radius r has rho = r for r <= R_i / 2,
/// rho = 1 for r >= R_i, and a smooth monotone blend in between. Points in no
/// chart (chart = -1) have rho = 1.
class RadiusFunction {
 public:
  RadiusFunction(std::vector<double> chart_radii, double epsilon = 1.0);

  double operator()(int chart, double r) const;
  std::size_t charts() const { return radii_.size(); }
  double epsilon() const { return epsilon_; }

  /// max over the given radii of |rho - r| / r^{1+epsilon}. Bounded
  /// independently of the sample set for a valid radius function.
  double ratio_bound(int chart, std::span<const double> radii) const;

 private:
  std::vector<double> radii_;
  double epsilon_;
};

/// C^infinity step: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s);

struct WeightedSample {
  int chart = -1;                    // conical point index, -1 outside every chart
  double rho = 1.0;                  // radius function value
  std::vector<double> derivatives;   // |nabla^j u| for j = 0..k
  double volume = 0.0;               // quadrature weight dV_g
};

/// sum_j sup |rho^{-gamma + j} nabla^j u|.
double holder_norm(std::span<const WeightedSample> samples, int k, const WeightVector& gamma);

/// (sum_j sum_samples |rho^{-gamma + j} nabla^j u|^p rho^{-m} volume)^{1/p}.
double sobolev_norm(std::span<const WeightedSample> samples, int k, double p, const WeightVector& gamma, int m);

/// Supremum of |u| over one annulus [r_inner, r_outer).
struct AnnulusSup {
  double r_inner = 0.0;
  double r_outer = 0.0;
  double sup = 0.0;
};

/// Dyadic annuli [r_max 2^{-(k+1)}, r_max 2^{-k}) for k = 0..count-1; annuli
/// without samples are dropped.
std::vector<AnnulusSup> dyadic_annulus_suprema(std::span<const double> r, std::span<const double> values,
                                               double r_max, int count);

struct RateFit {
  double rate = 0.0;
  double standard_error = 0.0;
};

/// log-log least-squares slope of sup versus the annulus outer radius.
/// Needs at least 5 annuli with nonzero suprema.
RateFit decay_rate(std::span<const AnnulusSup> annuli);

/// CSV with header containing: id, rho, value, and optional chart, d1, d2, ...,
/// volume columns. Missing derivative columns are absent, not zero.
std::vector<WeightedSample> read_weighted_samples_csv(std::istream& in);

/// Norm report: holder and (when volumes are present) sobolev norms.
nlohmann::json norm_report(std::span<const WeightedSample> samples, int k, double p, const WeightVector& gamma, int m);

}  // namespace conic_lmcf
