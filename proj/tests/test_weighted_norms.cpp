#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "conic_lmcf/errors.hpp"
#include "conic_lmcf/weighted_norms.hpp"

using namespace conic_lmcf;

namespace {

std::vector<WeightedSample> radial_samples(double gamma_pow, int k, int count = 400) {
  std::vector<WeightedSample> out;
  for (int i = 0; i < count; ++i) {
    const double rho = std::pow(10.0, -4.0 + 4.0 * i / (count - 1.0));
    WeightedSample s{0, rho, {}, 0.0};
    double coef = 1.0;
    for (int j = 0; j <= k; ++j) {
      s.derivatives.push_back(std::abs(coef) * std::pow(rho, gamma_pow - j));
      coef *= gamma_pow - j;
    }
    out.push_back(s);
  }
  return out;
}

std::vector<double> log_radii(double lo, double hi, int count) {
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(lo * std::pow(hi / lo, i / (count - 1.0)));
  return r;
}

}  // namespace

TEST_CASE("holder norm examples") {
  const WeightVector g{{1.7}};
  CHECK(holder_norm(radial_samples(1.7, 0), 0, g) == doctest::Approx(1.0).epsilon(1e-13));
  const double v = holder_norm(radial_samples(2.7, 0), 0, g);
  CHECK(v <= 1.0 + 1e-13);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-13));  // attained at rho = 1

  std::vector<WeightedSample> s;
  for (double r : log_radii(1e-3, 1.0, 50)) s.push_back({0, r, {std::pow(r, 2.5), 2.5 * std::pow(r, 1.5)}, 0.0});
  CHECK(holder_norm(s, 1, WeightVector{{2.5}}) == doctest::Approx(3.5).epsilon(1e-13));
  CHECK_THROWS_AS(holder_norm(s, 2, WeightVector{{2.5}}), InvalidInput);
}

TEST_CASE("sobolev norm examples") {
  std::vector<WeightedSample> zero;
  for (double r : log_radii(1e-2, 1.0, 20)) zero.push_back({0, r, {0.0}, 0.01});
  CHECK(sobolev_norm(zero, 0, 2.0, WeightVector{{1.0}}, 3) == 0.0);
  CHECK_THROWS_AS(sobolev_norm(zero, 0, 0.5, WeightVector{{1.0}}, 3), InvalidInput);

  // gamma = -m/p reproduces the unweighted L^p quadrature
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1.0), val(-2.0, 2.0);
  for (double p : {1.0, 2.0, 3.5}) {
    const int m = 3;
    std::vector<WeightedSample> s;
    double plain = 0.0;
    for (int i = 0; i < 300; ++i) {
      WeightedSample w{0, u(rng), {val(rng)}, u(rng) * 1e-2};
      plain += std::pow(std::abs(w.derivatives[0]), p) * w.volume;
      s.push_back(w);
    }
    CHECK(sobolev_norm(s, 0, p, WeightVector{{-m / p}}, m) == doctest::Approx(std::pow(plain, 1.0 / p)).epsilon(1e-12));
  }
}

TEST_CASE("sobolev norm of r^a on a truncated cone") {
  // dV = r^{m-1} dr dV_h, vol(link) = 1; closed form of the radial integral
  const int m = 3;
  const double a = 1.3, gamma = 0.4, p = 2.0, r0 = 0.05, R = 0.5;
  const int n = 20000;
  std::vector<WeightedSample> s;
  const double h = std::log(R / r0) / n;
  for (int i = 0; i < n; ++i) {
    const double r = r0 * std::exp((i + 0.5) * h);
    s.push_back({0, r, {std::pow(r, a)}, std::pow(r, m - 1) * r * h});
  }
  const double e = p * (a - gamma);
  const double exact = std::pow((std::pow(R, e) - std::pow(r0, e)) / e, 1.0 / p);
  CHECK(sobolev_norm(s, 0, p, WeightVector{{gamma}}, m) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("radius function") {
  const RadiusFunction rho({0.5, 1.0}, 1.0);
  CHECK(rho(0, 0.1) == 0.1);
  CHECK(rho(0, 0.25) == 0.25);
  CHECK(rho(0, 0.5) == 1.0);
  CHECK(rho(0, 0.7) == 1.0);
  CHECK(rho(-1, 0.01) == 1.0);
  double prev = 0.0;
  for (double r = 0.001; r < 0.6; r += 0.001) {
    const double v = rho(0, r);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    CHECK(v >= prev);
    prev = v;
  }
  const double b1 = rho.ratio_bound(0, log_radii(1e-4, 0.5, 200));
  const double b2 = rho.ratio_bound(0, log_radii(1e-6, 0.5, 2000));
  CHECK(std::isfinite(b1));
  CHECK(b2 <= 2.0 * b1 + 1e-12);
  CHECK_THROWS_AS(RadiusFunction({0.0}), InvalidInput);
  CHECK(smooth_step(-1.0) == 0.0);
  CHECK(smooth_step(2.0) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
}

TEST_CASE("decay rate examples") {
  auto samples = [](auto f, double rmax) {
    std::vector<double> r = log_radii(rmax * 1e-3, rmax, 400), v;
    for (double x : r) v.push_back(f(x));
    return std::make_pair(r, v);
  };
  {
    auto [r, v] = samples([](double x) { return std::pow(x, 2.5); }, 1.0);
    const auto fit = decay_rate(dyadic_annulus_suprema(r, v, 1.0 * (1 + 1e-12), 8));
    // suprema sit at the largest sample below each outer radius
    CHECK(std::abs(fit.rate - 2.5) <= 5e-3);
  }
  {
    auto [r, v] = samples([](double x) { return std::pow(x, 2.5) + std::pow(x, 4.0); }, 0.125);
    CHECK(std::abs(decay_rate(dyadic_annulus_suprema(r, v, 0.125 * (1 + 1e-12), 8)).rate - 2.5) <= 0.05);
  }
  {
    auto [r, v] = samples([](double x) { return x * x; }, 1.0);
    const auto annuli = dyadic_annulus_suprema(r, v, 1.0 * (1 + 1e-12), 8);
    CHECK(decay_rate(annuli).rate == doctest::Approx(2.0).epsilon(5e-3));
    // scaling invariance
    std::vector<double> scaled;
    for (double x : v) scaled.push_back(-7.0 * x);
    CHECK(decay_rate(dyadic_annulus_suprema(r, scaled, 1.0 * (1 + 1e-12), 8)).rate ==
          doctest::Approx(decay_rate(annuli).rate).epsilon(1e-12));
    CHECK_THROWS_AS(decay_rate(std::span(annuli).first(4)), InvalidInput);
  }
  {
    auto [r, v] = samples([](double) { return 0.0; }, 1.0);
    CHECK_THROWS_AS(decay_rate(dyadic_annulus_suprema(r, v, 1.0, 8)), InvalidInput);
  }
}

TEST_CASE("norm equivalence under a change of radius function") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0), c(0.5, 2.0);
  for (double gamma : {-1.5, 0.0, 2.5}) {
    const int k = 2;
    std::vector<WeightedSample> a, b;
    for (int i = 0; i < 200; ++i) {
      WeightedSample s{0, 0.01 + 0.99 * u(rng), {u(rng), u(rng), u(rng)}, 0.0};
      a.push_back(s);
      s.rho = std::min(1.0, s.rho * c(rng));
      if (s.rho / a.back().rho < 0.5) s.rho = 0.5 * a.back().rho;
      b.push_back(s);
    }
    const double na = holder_norm(a, k, WeightVector{{gamma}}), nb = holder_norm(b, k, WeightVector{{gamma}});
    const double bound = std::pow(2.0, std::abs(gamma) + k);
    CHECK(nb <= bound * na * (1 + 1e-12));
    CHECK(nb >= na / bound * (1 - 1e-12));
  }
}

TEST_CASE("holder norm grows with the weight") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.001, 1.0);
  std::vector<WeightedSample> s;
  for (int i = 0; i < 100; ++i) s.push_back({0, u(rng), {u(rng), u(rng)}, 0.0});
  double prev = 0.0;
  for (double g = -2.0; g <= 3.0; g += 0.25) {
    const double v = holder_norm(s, 1, WeightVector{{g}});
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("sample CSV and report") {
  std::stringstream csv("id,rho,value,d1,volume\n0,0.1,0.01,0.2,0.5\n1,0.5,0.25,1.0,0.5\n2,1,1,2,0.5\n");
  const auto s = read_weighted_samples_csv(csv);
  REQUIRE(s.size() == 3);
  CHECK(s[0].derivatives.size() == 2);
  CHECK(s[2].chart == -1);
  const auto rep = norm_report(s, 1, 2.0, WeightVector{{2.0}}, 3);
  CHECK(rep["holder_norm"].get<double>() == doctest::Approx(holder_norm(s, 1, WeightVector{{2.0}})));
  CHECK(rep.contains("sobolev_norm"));
  CHECK_THROWS_AS(holder_norm(s, 2, WeightVector{{2.0}}), InvalidInput);
  std::stringstream bad("id,value\n0,1\n");
  CHECK_THROWS_AS(read_weighted_samples_csv(bad), InvalidInput);
}
