#include "conic_lmcf/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {

namespace {

constexpr double kCloseExponents = 0.05;
constexpr double kRemainderScan = 0.01;

void require_regular_weight(const ExponentTable& table, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidInput("asymptotics need a weight gamma > 0");
  if (gamma > table.window().hi + table.tolerance()) {
    std::ostringstream msg;
    msg << "exponent table window ends at " << table.window().hi << ", below gamma = " << gamma;
    throw WindowTooSmall(msg.str());
  }
  if (table.in_E(gamma)) {
    std::ostringstream msg;
    msg << "gamma = " << gamma << " is an exceptional rate";
    throw ExceptionalWeight(msg.str(), {0});
  }
}

struct Fit {
  Eigen::VectorXd coefficients;  // basis coefficients, remainder last
  double residual = 0.0;
};

// Weighted least squares of u on the columns r^{powers}. Columns are scaled
// to unit norm before the QR so that r^0 and r^4 on [1e-4, 1e-1] stay usable.
Fit weighted_fit(const Eigen::VectorXd& r, const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                 const std::vector<double>& powers) {
  const Eigen::Index n = r.size();
  const Eigen::Index p = static_cast<Eigen::Index>(powers.size());
  Eigen::MatrixXd a(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = w[i] * std::pow(r[i], powers[j]);
  Eigen::VectorXd scale(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    scale[j] = a.col(j).norm();
    if (scale[j] > 0.0) a.col(j) /= scale[j];
  }
  const Eigen::VectorXd b = w.cwiseProduct(u);
  Fit fit;
  if (p == 0) {
    fit.coefficients = Eigen::VectorXd();
    fit.residual = b.norm();
    return fit;
  }
  Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
  fit.residual = (a * x - b).norm();
  for (Eigen::Index j = 0; j < p; ++j) x[j] = scale[j] > 0.0 ? x[j] / scale[j] : 0.0;
  fit.coefficients = x;
  return fit;
}

}  // namespace

std::vector<AsymptoticTerm> model_basis(const ExponentTable& table, double lambda, double gamma, bool mode_only) {
  std::vector<AsymptoticTerm> basis;
  const double tol = table.tolerance();
  for (const auto& e : table.entries()) {
    if (e.alpha < -tol || e.alpha >= gamma - tol) continue;
    if (mode_only && std::abs(e.lambda - lambda) > tol * std::max(1.0, lambda)) continue;
    for (int k = 0; e.alpha + 2.0 * k < gamma - tol; ++k) {
      // r^{alpha + 2k} already present through another (alpha', k')
      const bool seen = std::any_of(basis.begin(), basis.end(), [&](const AsymptoticTerm& t) {
        return std::abs(t.exponent() - (e.alpha + 2.0 * k)) <= tol;
      });
      if (!seen) basis.push_back({std::max(e.alpha, 0.0), k, 0.0});
    }
  }
  std::sort(basis.begin(), basis.end(),
            [](const AsymptoticTerm& a, const AsymptoticTerm& b) { return a.exponent() < b.exponent(); });
  return basis;
}

AsymptoticExpansion fit_expansion(std::span<const double> r, std::span<const double> u, double lambda,
                                  const ExponentTable& table, double gamma, double r_outer,
                                  const FitOptions& options) {
  if (r.size() != u.size()) throw InvalidInput("radius and value samples differ in length");
  if (!(r_outer > 0.0)) throw InvalidInput("outer radius must be positive");
  if (!(options.window_outer > 0.0 && options.window_outer <= 1.0) || !(options.window_decades > 0.0))
    throw InvalidInput("fit window must satisfy 0 < window_outer <= 1 and window_decades > 0");
  require_regular_weight(table, gamma);

  AsymptoticExpansion out;
  out.terms = model_basis(table, lambda, gamma, options.mode_only);
  for (std::size_t i = 1; i < out.terms.size(); ++i)
    if (out.terms[i].exponent() - out.terms[i - 1].exponent() < kCloseExponents) {
      std::ostringstream msg;
      msg << "ill-conditioned fit: basis exponents " << out.terms[i - 1].exponent() << " and "
          << out.terms[i].exponent() << " are closer than " << kCloseExponents;
      out.warnings.push_back(msg.str());
    }

  double r_min = std::numeric_limits<double>::infinity();
  for (double x : r)
    if (x > 0.0) r_min = std::min(r_min, x);
  const double hi = options.window_outer * r_outer;
  const double lo = std::max(hi * std::pow(10.0, -options.window_decades), r_min);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] >= lo && r[i] <= hi) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return r[a] < r[b]; });
  const std::size_t needed = out.terms.size() + 3;
  if (idx.size() < needed) {
    std::ostringstream msg;
    msg << "fit window [" << lo << ", " << hi << "] holds " << idx.size() << " nodes, need " << needed;
    throw InvalidInput(msg.str());
  }

  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd rw(n), uw(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    rw[i] = r[idx[i]];
    uw[i] = u[idx[i]];
    if (!std::isfinite(uw[i])) throw NumericalFailure("non-finite solution value inside the fit window");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double left = std::log(rw[std::max<Eigen::Index>(i - 1, 0)]);
    const double right = std::log(rw[std::min<Eigen::Index>(i + 1, n - 1)]);
    w[i] = std::pow(rw[i], -gamma) * std::sqrt(std::max(0.5 * (right - left), 1e-300));
  }

  std::vector<double> powers;
  for (const auto& t : out.terms) powers.push_back(t.exponent());
  const double top = powers.empty() ? -std::numeric_limits<double>::infinity() : powers.back();

  // Data that the basis reproduces to roundoff needs no remainder column; a
  // free power would only add a nearly collinear column.
  bool exact = false;
  Fit best;
  if (!powers.empty()) {
    best = weighted_fit(rw, uw, w, powers);
    exact = best.residual <= 1e-13 * w.cwiseProduct(uw).norm();
    if (exact) {
      // any weights give the same exact fit; drop r^{-gamma}, which starves
      // the top powers of weight, for the best conditioning
      Eigen::VectorXd flat(n);
      for (Eigen::Index i = 0; i < n; ++i) flat[i] = w[i] * std::pow(rw[i], gamma);
      best = weighted_fit(rw, uw, flat, powers);
    }
  }

  // Free remainder power r^s; the basis coefficients are read off the best s.
  auto trial = [&](double s) {
    auto p = powers;
    p.push_back(s);
    return weighted_fit(rw, uw, w, p);
  };
  auto admissible = [&](double s) {
    return std::none_of(powers.begin(), powers.end(),
                        [&](double b) { return std::abs(b - s) < 2.0 * kRemainderScan; });
  };
  const double s_lo = std::max(gamma - 1.0, top + 2.0 * kRemainderScan);
  const double s_hi = gamma + 2.0;
  double best_s = s_lo;
  if (!exact) best = trial(s_lo);
  for (double s = s_lo; !exact && s <= s_hi + 1e-12; s += kRemainderScan) {
    if (!admissible(s)) continue;
    Fit f = trial(s);
    if (f.residual < best.residual) {
      best = f;
      best_s = s;
    }
  }
  // golden-section refinement around the best scan point
  double a = std::max(best_s - kRemainderScan, s_lo), b = std::min(best_s + kRemainderScan, s_hi);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; !exact && it < 40 && b - a > 1e-7; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (trial(c).residual < trial(d).residual)
      b = d;
    else
      a = c;
  }
  if (!exact && admissible(0.5 * (a + b))) {
    Fit f = trial(0.5 * (a + b));
    if (f.residual < best.residual) best = f;
  }
  for (std::size_t j = 0; j < out.terms.size(); ++j) out.terms[j].coefficient = best.coefficients[j];

  std::vector<double> rem(n), rr(n);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    rr[i] = rw[i];
    rem[i] = uw[i] - evaluate_terms(out.terms, rw[i]);
    out.remainder_level = std::max(out.remainder_level, std::abs(rem[i]));
    scale = std::max(scale, std::abs(uw[i]));
  }
  if (out.remainder_level <= 1e-12 * scale || out.remainder_level == 0.0) {
    out.remainder_rate = std::numeric_limits<double>::quiet_NaN();
    out.remainder_rate_error = 0.0;
    return out;
  }
  const int count = static_cast<int>(std::floor(std::log2(hi / lo)));
  auto annuli = dyadic_annulus_suprema(rr, rem, hi * (1.0 + 1e-12), count);
  annuli.erase(std::remove_if(annuli.begin(), annuli.end(), [](const AnnulusSup& s) { return !(s.sup > 0.0); }),
               annuli.end());
  if (annuli.size() < 5) {
    out.warnings.push_back("fewer than 5 populated annuli; remainder rate not fitted");
    out.remainder_rate = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const RateFit fit = decay_rate(annuli);
  out.remainder_rate = fit.rate;
  out.remainder_rate_error = fit.standard_error;
  return out;
}

std::vector<AsymptoticExpansion> extract_asymptotics(const ModeSolution& sol, const ExponentTable& table,
                                                     double gamma, const FitOptions& options) {
  require_regular_weight(table, gamma);
  if (sol.m != table.m()) throw InvalidInput("solution and exponent table disagree on m");
  std::vector<AsymptoticExpansion> out;
  const auto& nodes = sol.grid.nodes();
  std::vector<double> row(nodes.size());
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    if (sol.times[i] <= 0.0) continue;
    for (std::size_t j = 0; j < nodes.size(); ++j) row[j] = sol.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    auto e = fit_expansion(nodes, row, sol.lambda, table, gamma, sol.grid.R(), options);
    e.time = sol.times[i];
    out.push_back(std::move(e));
  }
  return out;
}

double evaluate_terms(std::span<const AsymptoticTerm> terms, double r) {
  double s = 0.0;
  for (const auto& t : terms) s += t.coefficient * std::pow(r, t.exponent());
  return s;
}

std::vector<AsymptoticTerm> model_laplacian(std::span<const AsymptoticTerm> terms, double lambda, int m) {
  std::vector<AsymptoticTerm> out;
  for (const auto& t : terms) {
    const double beta = t.exponent();
    const double c = t.coefficient * (beta * (beta + m - 2.0) - lambda);
    if (c == 0.0) continue;
    if (t.k == 0)
      out.push_back({t.alpha - 2.0, 0, c});  // alpha off the roots of this mode
    else
      out.push_back({t.alpha, t.k - 1, c});
  }
  return out;
}

AsymptoticExtension::AsymptoticExtension(std::vector<AsymptoticTerm> terms, double cutoff)
    : terms_(std::move(terms)), cutoff_(cutoff) {
  if (!(cutoff_ > 0.0 && cutoff_ <= 1.0)) throw InvalidInput("cutoff radius must lie in (0, 1]");
}

double AsymptoticExtension::operator()(double rho) const {
  if (rho >= cutoff_) return 0.0;
  const double chi = 1.0 - smooth_step((rho - 0.5 * cutoff_) / (0.5 * cutoff_));
  return chi * evaluate_terms(terms_, rho);
}

AsymptoticExtension extend_asymptotic(std::vector<AsymptoticTerm> terms, double cutoff) {
  return AsymptoticExtension(std::move(terms), cutoff);
}

namespace {

void check_components(std::span<const ExponentTable> tables, const WeightVector& gamma) {
  if (tables.size() != gamma.gamma.size()) {
    std::ostringstream msg;
    msg << tables.size() << " exponent tables but " << gamma.gamma.size() << " weights";
    throw InvalidInput(msg.str());
  }
}

}  // namespace

int fredholm_index(std::span<const ExponentTable> tables, const WeightVector& gamma) {
  check_components(tables, gamma);
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < tables.size(); ++i)
    if (tables[i].in_D(gamma.gamma[i])) bad.push_back(i);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "weight is an exceptional exponent on component(s)";
    for (auto i : bad) msg << ' ' << i;
    throw ExceptionalWeight(msg.str(), bad);
  }
  int index = 0;
  for (std::size_t i = 0; i < tables.size(); ++i) index -= tables[i].count_M(gamma.gamma[i]);
  return index;
}

int fredholm_index_with_asymptotics(std::span<const ExponentTable> tables, const WeightVector& gamma) {
  check_components(tables, gamma);
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const double g = gamma.gamma[i];
    if (!(g > 2.0 - tables[i].m())) throw InvalidInput("discrete asymptotics need gamma > 2 - m");
    if (tables[i].in_E(g)) bad.push_back(i);
  }
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "weight is an exceptional rate on component(s)";
    for (auto i : bad) msg << ' ' << i;
    throw ExceptionalWeight(msg.str(), bad);
  }
  int index = 0;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const double g = gamma.gamma[i];
    index += -tables[i].count_M(g) + tables[i].model_space_dimension(g) - tables[i].model_space_dimension(g - 2.0);
  }
  return index;
}

}  // namespace conic_lmcf
