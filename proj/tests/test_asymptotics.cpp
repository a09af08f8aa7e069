#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "conic_lmcf/asymptotics.hpp"
#include "conic_lmcf/errors.hpp"

using namespace conic_lmcf;

namespace {

ExponentTable sphere_table(double hi = 5.0) { return exponents(eigenvalues(RoundSphere{2}, 40.0), 3, {-0.5, hi}); }

ExponentTable torus_table() {
  Eigen::MatrixXd H(2, 2);
  H << 2.0, 1.0, 1.0, 2.0;
  return exponents(eigenvalues(FlatTorus{H / 3.0}, 40.0), 3, {-3.0, 5.0});
}

std::vector<double> graded(int n) {
  std::vector<double> r;
  for (int j = 1; j <= n; ++j) r.push_back(std::pow(double(j) / n, 2));
  return r;
}

ModeSolution sqrt_forcing_solve(int cells) {
  return solve_mode({3, 0.0, {}, {}, 1.0}, RadialGrid(1.0, cells, 2.0), 0.1, 1e-3,
                    [](double, double r) { return std::sqrt(r); });
}

}  // namespace

TEST_CASE("pure basis element is recovered exactly") {
  const auto r = graded(400);
  std::vector<double> u;
  for (double x : r) u.push_back(3.0 * x * x);
  const auto e = fit_expansion(r, u, 6.0, sphere_table(), 2.4, 1.0);
  REQUIRE(e.terms.size() == 1);
  CHECK(e.terms[0].alpha == doctest::Approx(2.0));
  CHECK(e.terms[0].k == 0);
  CHECK(e.terms[0].coefficient == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(e.remainder_level < 1e-14);
}

TEST_CASE("decay above the weight leaves no terms") {
  const auto r = graded(400);
  std::vector<double> u;
  for (double x : r) u.push_back(std::pow(x, 2.5));
  // lambda = 12 on S^2: alpha_+ = 3 lies above gamma
  const auto e = fit_expansion(r, u, 12.0, sphere_table(), 2.4, 1.0);
  CHECK(e.terms.empty());
  CHECK(std::abs(e.remainder_rate - 2.5) <= 0.03);
}

TEST_CASE("synthesized expansions round trip") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(-2.0, 2.0);
  const auto r = graded(800);
  for (double lambda : {0.0, 2.0, 6.0}) {
    const double gamma = 4.5;
    const auto basis = model_basis(sphere_table(), lambda, gamma);
    REQUIRE(!basis.empty());
    std::vector<AsymptoticTerm> truth = basis;
    for (auto& t : truth) t.coefficient = c(rng);
    std::vector<double> u;
    for (double x : r) u.push_back(evaluate_terms(truth, x));
    const auto e = fit_expansion(r, u, lambda, sphere_table(), gamma, 1.0);
    REQUIRE(e.terms.size() == truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
      CHECK(std::abs(e.terms[i].coefficient - truth[i].coefficient) <= 1e-8);
  }
}

TEST_CASE("basis membership") {
  const auto t = torus_table();
  for (double lambda : {0.0, 2.0, 6.0, 8.0}) {
    for (const auto& term : model_basis(t, lambda, 4.1)) {
      CHECK(term.exponent() < 4.1);
      CHECK(t.in_D(term.alpha));
      CHECK(term.alpha >= 0.0);
    }
  }
  const auto all = model_basis(t, 0.0, 2.5, false);
  // 0, 1, 2 and 0 + 2 (same exponent), (-1 + sqrt 33) / 2
  CHECK(all.size() == 4);
}

TEST_CASE("exceptional weights and close exponents") {
  const auto r = graded(200);
  std::vector<double> u(r.size(), 1.0);
  CHECK_THROWS_AS(fit_expansion(r, u, 0.0, sphere_table(), 2.0, 1.0), ExceptionalWeight);
  CHECK_THROWS_AS(fit_expansion(r, u, 0.0, sphere_table(), 1.0, 1.0), ExceptionalWeight);
  CHECK_THROWS_AS(fit_expansion(r, u, 0.0, sphere_table(2.0), 2.5, 1.0), WindowTooSmall);

  const ExponentTable close(3, {-0.5, 3.0}, {{0.0, 1, 0.0}, {1.0, 1, 2.0}, {1.03, 1, 2.0909}});
  FitOptions o;
  o.mode_only = false;
  std::vector<double> v;
  for (double x : r) v.push_back(1.0 + x + std::pow(x, 2.5));
  const auto e = fit_expansion(r, v, 0.0, close, 1.5, 1.0, o);
  CHECK_FALSE(e.warnings.empty());
}

TEST_CASE("heat solve asymptotics agree with a fine reference") {
  const auto table = sphere_table();
  const auto ref = extract_asymptotics(sqrt_forcing_solve(3200), table, 2.5).back();
  for (int cells : {400, 800}) {
    const auto e = extract_asymptotics(sqrt_forcing_solve(cells), table, 2.5).back();
    REQUIRE(e.terms.size() == 2);
    CHECK(e.terms[0].exponent() == 0.0);
    CHECK(e.terms[1].exponent() == 2.0);
    CHECK(e.terms[0].coefficient != 0.0);
    CHECK(e.terms[1].coefficient != 0.0);
    CHECK(e.terms[0].coefficient == doctest::Approx(ref.terms[0].coefficient).epsilon(1e-4));
    CHECK(e.terms[1].coefficient == doctest::Approx(ref.terms[1].coefficient).epsilon(1e-3));
    CHECK(std::abs(e.remainder_rate - 2.5) <= 0.15);
    CHECK(e.time == doctest::Approx(0.1));
  }
}

TEST_CASE("lower-order perturbations keep the leading exponent") {
  const auto table = sphere_table();
  auto solve = [](LaplaceTypeSpec spec) {
    return solve_mode(spec, RadialGrid(1.0, 400, 2.0), 0.1, 1e-3, [](double, double r) { return std::sqrt(r); });
  };
  const auto pure = extract_asymptotics(solve({3, 0.0, {}, {}, 1.0}), table, 0.5).back();
  const auto pert = extract_asymptotics(
      solve({3, 0.0, [](double) { return 0.3; }, [](double r) { return -0.2 / r; }, 1.0}), table, 0.5).back();
  REQUIRE(pure.terms.size() == 1);
  REQUIRE(pert.terms.size() == 1);
  CHECK(pure.terms[0].exponent() == pert.terms[0].exponent());
  CHECK(std::abs(pure.terms[0].coefficient) > 1e-3);
  CHECK(std::abs(pert.terms[0].coefficient) > 1e-3);
  CHECK(pure.remainder_rate > 0.5);
  CHECK(pert.remainder_rate > 0.5);
}

TEST_CASE("model laplacian lowers k") {
  const std::vector<AsymptoticTerm> v = {{0.0, 1, 2.0}, {1.0, 1, -1.0}, {0.0, 0, 5.0}};
  const auto lv = model_laplacian(v, 0.0, 3);
  REQUIRE(lv.size() == 2);  // constants are harmonic
  CHECK(lv[0].exponent() == 0.0);
  CHECK(lv[0].coefficient == doctest::Approx(2.0 * oracle::radial_symbol(2.0, 0.0, 3)));
  CHECK(lv[1].exponent() == 1.0);
}

TEST_CASE("cutoff extension") {
  const auto ext = extend_asymptotic({{0.0, 1, 1.0}}, 0.5);
  for (double rho : {0.01, 0.1, 0.2, 0.2499}) CHECK(ext(rho) == doctest::Approx(rho * rho).epsilon(1e-14));
  for (double rho : {0.5, 0.6, 1.0}) CHECK(ext(rho) == 0.0);
  const auto zero = extend_asymptotic({}, 0.5);
  CHECK(zero(0.3) == 0.0);

  // D(chi v) - chi (D v) vanishes off [cutoff / 2, cutoff]
  const std::vector<AsymptoticTerm> v = {{0.0, 1, 1.5}, {1.0, 1, -0.5}};
  const double lambda = 0.0, cutoff = 0.5;
  const int m = 3;
  const auto ev = extend_asymptotic(v, cutoff);
  const auto elv = extend_asymptotic(model_laplacian(v, lambda, m), cutoff);
  auto radial = [&](const auto& f, double r) {
    const double h = 1e-4;
    const double d2 = (f(r + h) - 2 * f(r) + f(r - h)) / (h * h);
    const double d1 = (f(r + h) - f(r - h)) / (2 * h);
    return d2 + (m - 1) / r * d1 - lambda / (r * r) * f(r);
  };
  double inside = 0.0, band = 0.0, outside = 0.0;
  for (double r = 0.02; r < 0.9; r += 0.005) {
    const double res = std::abs(radial(ev, r) - elv(r));
    if (r < cutoff / 2 - 2e-4) inside = std::max(inside, res);
    else if (r > cutoff + 2e-4) outside = std::max(outside, res);
    else band = std::max(band, res);
  }
  CHECK(inside < 1e-5);
  CHECK(outside == 0.0);
  CHECK(band > 1e-3);
}

TEST_CASE("Fredholm index") {
  const auto t = torus_table();
  const std::vector<ExponentTable> one{t};
  CHECK(fredholm_index(one, WeightVector{{2.1}}) == -13);
  CHECK(fredholm_index(one, WeightVector{{-0.5}}) == 0);
  CHECK(fredholm_index(one, WeightVector{{-0.99}}) == 0);
  try {
    fredholm_index(one, WeightVector{{1.0}});
    FAIL("expected an exceptional weight");
  } catch (const ExceptionalWeight& e) {
    CHECK(e.components() == std::vector<std::size_t>{0});
  }

  const std::vector<ExponentTable> two{t, sphere_table()};
  CHECK(fredholm_index(two, WeightVector{{2.1, 1.5}}) == -13 - 4);
  try {
    fredholm_index(two, WeightVector{{2.0, 2.0}});
    FAIL("expected an exceptional weight");
  } catch (const ExceptionalWeight& e) {
    CHECK(e.components() == std::vector<std::size_t>{0, 1});
  }
  CHECK_THROWS_AS(fredholm_index(two, WeightVector{{2.1}}), InvalidInput);
}

TEST_CASE("index with discrete asymptotics vanishes") {
  const auto t = torus_table();
  const std::vector<ExponentTable> one{t};
  for (double g = -0.95; g < 4.9; g += 0.0371) {
    if (t.in_E(g)) continue;
    CHECK(fredholm_index_with_asymptotics(one, WeightVector{{g}}) == 0);
  }
  CHECK_THROWS_AS(fredholm_index_with_asymptotics(one, WeightVector{{2.0}}), ExceptionalWeight);
  CHECK_THROWS_AS(fredholm_index_with_asymptotics(one, WeightVector{{3.0}}), ExceptionalWeight);
  CHECK_THROWS_AS(fredholm_index_with_asymptotics(one, WeightVector{{-1.5}}), InvalidInput);
}
