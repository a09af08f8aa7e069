#include "conic_lmcf/weighted_norms.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {
namespace {

double weight_of(const WeightVector& gamma, int chart) {
  if (chart < 0) return 0.0;  // rho^gamma = 1 off the charts
  if (static_cast<std::size_t>(chart) >= gamma.gamma.size())
    throw InvalidInput("sample chart index exceeds the weight vector");
  return gamma.gamma[static_cast<std::size_t>(chart)];
}

void check_samples(std::span<const WeightedSample> samples, int k) {
  if (k < 0) throw InvalidInput("derivative order must be >= 0");
  for (const auto& s : samples) {
    if (static_cast<int>(s.derivatives.size()) < k + 1)
      throw InvalidInput("missing derivative samples: need orders 0.." + std::to_string(k));
    if (!(s.rho > 0.0)) throw InvalidInput("radius function samples must be positive");
  }
}

}  // namespace

double smooth_step(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
  return f(s) / (f(s) + f(1.0 - s));
}

RadiusFunction::RadiusFunction(std::vector<double> chart_radii, double epsilon)
    : radii_(std::move(chart_radii)), epsilon_(epsilon) {
  for (double r : radii_)
    if (!(r > 0.0 && r <= 1.0)) throw InvalidInput("chart radii must lie in (0, 1]");
  if (!(epsilon_ > 0.0)) throw InvalidInput("radius function epsilon must be positive");
}

double RadiusFunction::operator()(int chart, double r) const {
  if (chart < 0) return 1.0;
  if (static_cast<std::size_t>(chart) >= radii_.size()) throw InvalidInput("unknown chart index");
  if (!(r > 0.0)) throw InvalidInput("cone radius must be positive");
  const double big = radii_[static_cast<std::size_t>(chart)];
  if (r >= big) return 1.0;
  const double blend = smooth_step((r - 0.5 * big) / (0.5 * big));
  return (1.0 - blend) * r + blend;
}

double RadiusFunction::ratio_bound(int chart, std::span<const double> radii) const {
  double worst = 0.0;
  for (double r : radii) worst = std::max(worst, std::abs((*this)(chart, r) - r) / std::pow(r, 1.0 + epsilon_));
  return worst;
}

double holder_norm(std::span<const WeightedSample> samples, int k, const WeightVector& gamma) {
  check_samples(samples, k);
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    double sup = 0.0;
    for (const auto& s : samples) {
      const double w = std::pow(s.rho, -weight_of(gamma, s.chart) + j);
      sup = std::max(sup, std::abs(w * s.derivatives[static_cast<std::size_t>(j)]));
    }
    total += sup;
  }
  return total;
}

double sobolev_norm(std::span<const WeightedSample> samples, int k, double p, const WeightVector& gamma, int m) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("sobolev exponent p must lie in [1, inf)");
  check_samples(samples, k);
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    for (const auto& s : samples) {
      const double w = std::pow(s.rho, -weight_of(gamma, s.chart) + j);
      total += std::pow(std::abs(w * s.derivatives[static_cast<std::size_t>(j)]), p) * std::pow(s.rho, -m) * s.volume;
    }
  }
  return std::pow(total, 1.0 / p);
}

std::vector<AnnulusSup> dyadic_annulus_suprema(std::span<const double> r, std::span<const double> values,
                                               double r_max, int count) {
  if (r.size() != values.size()) throw InvalidInput("radius and value samples differ in length");
  std::vector<AnnulusSup> out;
  for (int k = 0; k < count; ++k) {
    AnnulusSup a{std::ldexp(r_max, -(k + 1)), std::ldexp(r_max, -k), 0.0};
    bool any = false;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] >= a.r_inner && r[i] < a.r_outer) {
        a.sup = std::max(a.sup, std::abs(values[i]));
        any = true;
      }
    }
    if (any) out.push_back(a);
  }
  return out;
}

RateFit decay_rate(std::span<const AnnulusSup> annuli) {
  if (annuli.size() < 5) throw InvalidInput("decay_rate needs at least 5 annuli");
  std::vector<double> x, y;
  for (const auto& a : annuli) {
    if (!(a.sup > 0.0) || !std::isfinite(a.sup)) throw InvalidInput("decay_rate: degenerate (zero) annulus supremum");
    x.push_back(std::log(a.r_outer));
    y.push_back(std::log(a.sup));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw InvalidInput("decay_rate: annuli share one radius");
  RateFit fit;
  fit.rate = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double res = y[i] - my - fit.rate * (x[i] - mx);
    sse += res * res;
  }
  fit.standard_error = std::sqrt(sse / (n - 2.0) / sxx);
  return fit;
}

std::vector<WeightedSample> read_weighted_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("sample CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"id", "rho", "value"})
    if (!col.count(required)) throw InvalidInput(std::string("sample CSV lacks column ") + required);
  int max_derivative = 0;
  while (col.count("d" + std::to_string(max_derivative + 1))) ++max_derivative;

  std::vector<WeightedSample> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::logic_error&) {
        throw InvalidInput("sample CSV: bad number '" + cell + "'");
      }
    }
    if (cells.size() != header.size()) throw InvalidInput("sample CSV: ragged row");
    WeightedSample s;
    s.rho = cells[col["rho"]];
    s.chart = col.count("chart") ? static_cast<int>(cells[col["chart"]]) : (s.rho < 1.0 ? 0 : -1);
    s.derivatives.push_back(cells[col["value"]]);
    for (int j = 1; j <= max_derivative; ++j) s.derivatives.push_back(cells[col["d" + std::to_string(j)]]);
    s.volume = col.count("volume") ? cells[col["volume"]] : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

nlohmann::json norm_report(std::span<const WeightedSample> samples, int k, double p, const WeightVector& gamma, int m) {
  nlohmann::json rep;
  rep["k"] = k;
  rep["p"] = p;
  rep["gamma"] = gamma.gamma;
  rep["samples"] = samples.size();
  rep["holder_norm"] = holder_norm(samples, k, gamma);
  const bool has_volume = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return s.volume > 0.0; });
  if (has_volume) rep["sobolev_norm"] = sobolev_norm(samples, k, p, gamma, m);
  return rep;
}

}  // namespace conic_lmcf
