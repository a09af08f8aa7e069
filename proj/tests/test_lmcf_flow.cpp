#include <cmath>

#include "doctest.h"

#include "conic_lmcf/errors.hpp"
#include "conic_lmcf/expression.hpp"
#include "conic_lmcf/lmcf_flow.hpp"

using namespace conic_lmcf;

namespace {

Eigen::VectorXd field(const PeriodicGrid& g, const std::string& expr) {
  const Expression e(expr);
  return g.sample([&](const std::vector<double>& x) { return e(x); });
}

// second-difference symbol of sin(k x) on the grid
double symbol(const PeriodicGrid& g, int k) {
  const double h = g.dx();
  return (2.0 - 2.0 * std::cos(k * h)) / (h * h);
}

}  // namespace

TEST_CASE("grid indexing") {
  const PeriodicGrid g(3, 8);
  CHECK(g.size() == 512);
  CHECK(g.shifted(0, 0, -1) == 7);
  CHECK(g.shifted(0, 1, 1) == 8);
  CHECK(g.shifted(0, 2, -1) == 7 * 64);
  CHECK(g.point(8 + 2)[0] == doctest::Approx(2 * g.dx()));
  CHECK(g.point(8 + 2)[1] == doctest::Approx(g.dx()));
  CHECK_THROWS_AS(PeriodicGrid(4, 8), InvalidInput);
  CHECK_THROWS_AS(PeriodicGrid(2, 2), InvalidInput);
}

TEST_CASE("Lagrangian angle examples") {
  const PeriodicGrid g(2, 32);
  CHECK(lagrangian_angle(g, Eigen::VectorXd::Zero(g.size())).cwiseAbs().maxCoeff() == 0.0);

  // Hess = diag(a, -a, 0) on the nodes with x1 = x2
  const PeriodicGrid g3(3, 16);
  const Eigen::VectorXd th3 = lagrangian_angle(g3, field(g3, "0.3*(cos(x1) - cos(x2))"));
  for (std::size_t i = 0; i < g3.size(); ++i) {
    if (i % 16 != (i / 16) % 16) continue;
    const Eigen::MatrixXd H = node_hessian(g3, field(g3, "0.3*(cos(x1) - cos(x2))"), i);
    CHECK(H(0, 0) == -H(1, 1));
    CHECK(std::abs(th3[i]) < 1e-15);
  }

  const double eps = 0.01;
  const Eigen::VectorXd u = eps * field(g, "sin(x1)");
  const Eigen::VectorXd th = lagrangian_angle(g, u);
  const double s = symbol(g, 1);
  for (std::size_t i = 0; i < g.size(); i += 7) {
    const double x = g.point(i)[0];
    CHECK(th[i] == doctest::Approx(std::atan(-eps * s * std::sin(x))).epsilon(1e-12));
    CHECK(std::abs(th[i] + eps * std::sin(x)) <= 2 * eps * eps * eps + 5e-3 * eps);
  }
}

TEST_CASE("graph condition violations list nodes") {
  const PeriodicGrid g(1, 64);
  // 1 + Hess = 0 exactly at x = pi / 2
  const Eigen::VectorXd u = (1.0 / symbol(g, 1)) * field(g, "sin(x1)");
  try {
    lagrangian_angle(g, u);
    FAIL("expected a graph-condition violation");
  } catch (const GraphConditionViolation& e) {
    REQUIRE(!e.nodes().empty());
    CHECK(e.nodes().front() == 16);
  }
  CHECK_THROWS_AS(make_state(g, u), GraphConditionViolation);
  CHECK(graph_condition(g, u) < 1e-6);
}

TEST_CASE("zero is bitwise stationary") {
  const PeriodicGrid g(2, 16);
  FlowState s = make_state(g, Eigen::VectorXd::Zero(g.size()));
  for (double dt : {1e-3, 0.1, 10.0}) {
    const FlowState n = flow_step(s, dt);
    CHECK(n.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(n.t == dt);
  }
}

TEST_CASE("constant angle is stationary") {
  const PeriodicGrid g(2, 16);
  const FlowState s = make_state(g, Eigen::VectorXd::Constant(g.size(), 0.7));
  const FlowState n = flow_step(s, 0.01);
  CHECK((n.u.array() - 0.7).abs().maxCoeff() < 1e-14);
}

TEST_CASE("small data follows the heat equation") {
  for (int m = 1; m <= 3; ++m) {
    const PeriodicGrid g(m, m == 3 ? 16 : 32);
    const double eps = 0.01, T = 0.2;
    const Eigen::VectorXd u0 = eps * field(g, "sin(x1)");
    const FlowRun run = run_flow(make_state(g, u0), T);
    const Eigen::VectorXd heat = run_heat(g, u0, T);
    CHECK((run.final_state.u - heat).cwiseAbs().maxCoeff() <= eps * eps * eps);
    // amplitude against the continuous heat equation
    CHECK(run.series.back().amplitude == doctest::Approx(eps * std::exp(-T)).epsilon(0.02));
    CHECK(run.final_state.t == doctest::Approx(T).epsilon(1e-14));
  }
}

TEST_CASE("stored theta matches recomputation") {
  const PeriodicGrid g(2, 32);
  const FlowRun run = run_flow(make_state(g, field(g, "0.1*(sin(x1) + cos(2*x2))")), 0.05);
  CHECK((run.final_state.theta - lagrangian_angle(g, run.final_state.u)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("translation invariance is preserved bitwise") {
  const PeriodicGrid g(2, 32);
  // invariant under x1 -> x1 + pi / 2 (8 grid steps)
  Eigen::VectorXd u0 = field(g, "0.2*sin(4*x1)*cos(x2) + 0.05*cos(x2)");
  // copy one period so the data is exactly invariant
  for (std::size_t i = 0; i < g.size(); ++i)
    if (i % 32 >= 8) u0[i] = u0[i - 8 * ((i % 32) / 8)];
  FlowState s = make_state(g, u0);
  for (int k = 0; k < 20; ++k) s = flow_step(s, default_dt(g));
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(s.u[i] == s.u[g.shifted(i, 0, 8)]);
    CHECK(s.theta[i] == s.theta[g.shifted(i, 0, 8)]);
  }
}

TEST_CASE("mean angle is conserved to second order") {
  const PeriodicGrid g(2, 32);
  for (double eps : {0.1, 0.05}) {
    const FlowRun run = run_flow(make_state(g, eps * field(g, "sin(x1) + cos(2*x2)")), 0.1);
    CHECK(std::abs(run.final_state.theta.mean()) <= eps * eps);
  }
}

TEST_CASE("sup of the angle does not increase") {
  const PeriodicGrid g(2, 32);
  for (const auto& ic : flow_catalog()) {
    const FlowRun run = run_flow(make_state(g, field(g, ic.expression)), 0.1);
    for (std::size_t k = 1; k < run.series.size(); ++k)
      CHECK(run.series[k].sup_theta <= run.series[k - 1].sup_theta + 1e-10);
  }
}

TEST_CASE("spatial convergence is second order") {
  auto run = [](int N) {
    const PeriodicGrid g(1, N);
    const FlowRun r = run_flow(make_state(g, field(g, "0.3*sin(x1)")), 0.05, {1e-4, {}, 12});
    return std::make_pair(g, r.final_state.u);
  };
  const auto [gr, ref] = run(256);
  double prev = 0.0;
  for (int N : {16, 32, 64}) {
    const auto [g, u] = run(N);
    const int stride = 256 / N;
    double err = 0.0;
    for (int i = 0; i < N; ++i) err = std::max(err, std::abs(u[i] - ref[i * stride]));
    if (prev > 0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("linearization defect") {
  const PeriodicGrid g(2, 32);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.size());
  const DefectReport z = linearization_defect(g, zero, {0.1, 0.05}, 0.1);
  CHECK(z.defects[0] == 0.0);
  CHECK(z.defects[1] == 0.0);
  CHECK_THROWS_AS(linearization_defect(g, zero, {0.05, 0.1}, 0.1), InvalidInput);
  CHECK_THROWS_AS(linearization_defect(g, zero, {}, 0.1), InvalidInput);

  const Eigen::VectorXd u0 = field(g, "sin(x1) + cos(2*x2)");
  const DefectReport r = linearization_defect(g, u0, {0.1, 0.05, 0.025}, 0.1);
  REQUIRE(r.ratios.size() == 2);
  // the angle is odd in the Hessian, so the defect is cubic in epsilon
  for (double q : r.ratios) CHECK(q == doctest::Approx(0.125).epsilon(0.02));

  const Eigen::VectorXd big = field(g, "sin(x1)") / symbol(g, 1);
  CHECK_THROWS_AS(linearization_defect(g, big, {1.0}, 0.1), GraphConditionViolation);
}

TEST_CASE("rejected steps are retried with a smaller step") {
  // steep initial data: the nominal step overshoots, halving recovers
  const PeriodicGrid g(1, 64);
  const double s = symbol(g, 1);
  const FlowState st = make_state(g, (0.9 / s) * field(g, "sin(x1)"));
  try {
    flow_step(st, 50.0);
  } catch (const GraphConditionViolation& e) {
    CHECK(e.suggested_dt() == 25.0);
  }
  const FlowRun run = run_flow(st, 0.05);
  CHECK(run.final_state.t == doctest::Approx(0.05));
}

TEST_CASE("expressions") {
  CHECK(Expression("1 + 2*3")({}) == 7.0);
  CHECK(Expression("-2^2")({}) == -4.0);
  CHECK(Expression("2^3^2")({}) == 512.0);
  CHECK(Expression("sin(pi/2) - cos(0)")({}) == doctest::Approx(0.0));
  CHECK(Expression("x1*x2 - z")({2.0, 3.0, 1.0}) == 5.0);
  CHECK(Expression("x2").dimension() == 2);
  CHECK(Expression("1.5e-1 * (x + y)")({1.0, 1.0}) == doctest::Approx(0.3));
  CHECK_THROWS_AS(Expression("sin x1"), InvalidInput);
  CHECK_THROWS_AS(Expression("1 +"), InvalidInput);
  CHECK_THROWS_AS(Expression("tan(x1)"), InvalidInput);
  CHECK_THROWS_AS(Expression("(1"), InvalidInput);
  CHECK_THROWS_AS(Expression("x2")({1.0}), InvalidInput);
}
