#include "conic_lmcf/exponent_table.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {

ExponentTable::ExponentTable(int m, AlphaWindow window, std::vector<Exponent> entries, double tolerance)
    : m_(m), window_(window), entries_(std::move(entries)), tolerance_(tolerance) {
  if (m_ < 3) throw InvalidInput("exponent tables need m >= 3");
  if (!(window_.lo <= window_.hi) || !std::isfinite(window_.lo) || !std::isfinite(window_.hi))
    throw InvalidInput("exponent window must be a bounded interval");
  std::sort(entries_.begin(), entries_.end(),
            [](const Exponent& a, const Exponent& b) { return a.alpha < b.alpha; });
}

void ExponentTable::require_covered(double lo, double hi, const char* what) const {
  if (lo < window_.lo - tolerance_ || hi > window_.hi + tolerance_) {
    std::ostringstream msg;
    msg << what << ": range [" << lo << ", " << hi << "] exceeds table window [" << window_.lo << ", "
        << window_.hi << "]";
    throw WindowTooSmall(msg.str());
  }
}

int ExponentTable::multiplicity(double alpha) const {
  require_covered(alpha, alpha, "multiplicity");
  int total = 0;
  for (const auto& e : entries_)
    if (std::abs(e.alpha - alpha) <= tolerance_) total += e.multiplicity;
  return total;
}

bool ExponentTable::in_D(double alpha) const { return multiplicity(alpha) > 0; }

bool ExponentTable::in_E(double beta) const {
  if (beta < 0.0) return in_D(beta);
  require_covered(0.0, beta, "E membership");
  for (const auto& e : entries_) {
    if (e.alpha < -tolerance_ || e.alpha > beta + tolerance_) continue;
    const double steps = (beta - e.alpha) / 2.0;
    if (std::abs(steps - std::round(steps)) * 2.0 <= tolerance_) return true;
  }
  return false;
}

int ExponentTable::count_M(double delta) const {
  int total = 0;
  if (delta < 0.0) {
    require_covered(delta, 0.0, "count_M");
    for (const auto& e : entries_)
      if (e.alpha > delta + tolerance_ && e.alpha < -tolerance_) total -= e.multiplicity;
  } else {
    require_covered(0.0, delta, "count_M");
    for (const auto& e : entries_)
      if (e.alpha >= -tolerance_ && e.alpha < delta - tolerance_) total += e.multiplicity;
  }
  return total;
}

int ExponentTable::count_M_closed(double delta) const {
  if (delta < 0.0) return count_M(delta);
  require_covered(0.0, delta, "count_M_closed");
  int total = 0;
  for (const auto& e : entries_)
    if (e.alpha >= -tolerance_ && e.alpha <= delta + tolerance_) total += e.multiplicity;
  return total;
}

int ExponentTable::count_n(double beta) const {
  if (beta < 0.0) return multiplicity(beta);
  require_covered(0.0, beta, "count_n");
  int total = multiplicity(beta);
  for (int k = 1; 2.0 * k <= beta + tolerance_; ++k) total += multiplicity(beta - 2.0 * k);
  return total;
}

std::vector<double> ExponentTable::extended_points(double hi) const {
  require_covered(0.0, std::max(hi, 0.0), "extended_points");
  std::vector<double> pts;
  for (const auto& e : entries_) {
    if (e.alpha < -tolerance_) continue;
    for (double beta = e.alpha; beta <= hi + tolerance_; beta += 2.0) pts.push_back(beta);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> distinct;
  for (double p : pts)
    if (distinct.empty() || p - distinct.back() > tolerance_) distinct.push_back(p);
  return distinct;
}

int ExponentTable::count_N(double delta) const {
  if (delta < 0.0) {
    // n = m below 2, so N and M agree for negative weights
    require_covered(delta, 0.0, "count_N");
    int total = 0;
    for (const auto& e : entries_)
      if (e.alpha > delta + tolerance_ && e.alpha < -tolerance_) total -= count_n(e.alpha);
    return total;
  }
  require_covered(0.0, delta, "count_N");
  int total = 0;
  for (double beta : extended_points(delta))
    if (beta < delta - tolerance_) total += count_n(beta);
  return total;
}

int ExponentTable::model_space_dimension(double gamma) const {
  if (gamma <= 0.0) return 0;
  require_covered(0.0, gamma, "model_space_dimension");
  int total = 0;
  for (const auto& e : entries_) {
    if (e.alpha < -tolerance_) continue;
    for (int k = 0; e.alpha + 2.0 * k < gamma - tolerance_; ++k) total += e.multiplicity;
  }
  return total;
}

ExponentTable exponents(const Spectrum& spectrum, int m, AlphaWindow window) {
  return exponents(spectrum, m, window, spectrum.discrete ? kMeshTolerance : kAnalyticTolerance);
}

ExponentTable exponents(const Spectrum& spectrum, int m, AlphaWindow window, double tolerance) {
  if (m < 3) throw InvalidInput("exponents need m >= 3");
  if (!(window.lo <= window.hi) || !std::isfinite(window.lo) || !std::isfinite(window.hi))
    throw InvalidInput("exponent window must be a bounded interval");
  const auto [cover_hi, cover_lo] = exponent_roots(spectrum.lambda_max, m);
  AlphaWindow clipped{std::max(window.lo, cover_lo), std::min(window.hi, cover_hi)};
  if (clipped.lo > clipped.hi) clipped.hi = clipped.lo;

  std::vector<Exponent> entries;
  for (const auto& eig : spectrum.entries) {
    const auto [plus, minus] = exponent_roots(eig.lambda, m);
    for (double a : {plus, minus})
      if (a >= clipped.lo - tolerance && a <= clipped.hi + tolerance)
        entries.push_back({a, eig.multiplicity, eig.lambda});
  }
  return ExponentTable(m, clipped, std::move(entries), tolerance);
}

}  // namespace conic_lmcf
