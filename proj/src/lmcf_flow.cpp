#include "conic_lmcf/lmcf_flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "conic_lmcf/errors.hpp"
#include "conic_lmcf/parallel.hpp"

namespace conic_lmcf {

PeriodicGrid::PeriodicGrid(int m, int N) : m_(m), N_(N) {
  if (m_ < 1 || m_ > 3) throw InvalidInput("flow grids support m = 1, 2, 3");
  if (N_ < 4) throw InvalidInput("flow grids need at least 4 points per axis");
  dx_ = 2.0 * std::numbers::pi / N_;
  size_ = 1;
  for (int a = 0; a < m_; ++a) {
    stride_.push_back(size_);
    size_ *= static_cast<std::size_t>(N_);
  }
}

std::vector<double> PeriodicGrid::point(std::size_t index) const {
  std::vector<double> x(m_);
  for (int a = 0; a < m_; ++a) x[a] = dx_ * static_cast<double>((index / stride_[a]) % N_);
  return x;
}

std::size_t PeriodicGrid::shifted(std::size_t index, int axis, int offset) const {
  const auto n = static_cast<long>(N_);
  const long c = static_cast<long>((index / stride_[axis]) % N_);
  const long moved = ((c + offset) % n + n) % n;
  return index + static_cast<std::size_t>(moved - c) * stride_[axis];
}

Eigen::VectorXd PeriodicGrid::sample(const std::function<double(const std::vector<double>&)>& f) const {
  Eigen::VectorXd u(size_);
  for (std::size_t i = 0; i < size_; ++i) u[i] = f(point(i));
  return u;
}

Eigen::MatrixXd node_hessian(const PeriodicGrid& grid, const Eigen::VectorXd& u, std::size_t node) {
  const int m = grid.m();
  const double h2 = grid.dx() * grid.dx();
  Eigen::MatrixXd H(m, m);
  for (int a = 0; a < m; ++a) {
    H(a, a) = (u[grid.shifted(node, a, 1)] - 2.0 * u[node] + u[grid.shifted(node, a, -1)]) / h2;
    for (int b = a + 1; b < m; ++b) {
      const std::size_t pa = grid.shifted(node, a, 1), ma = grid.shifted(node, a, -1);
      const double v = u[grid.shifted(pa, b, 1)] - u[grid.shifted(pa, b, -1)] - u[grid.shifted(ma, b, 1)] +
                       u[grid.shifted(ma, b, -1)];
      H(a, b) = H(b, a) = v / (4.0 * h2);
    }
  }
  return H;
}

namespace {

void check_field(const PeriodicGrid& grid, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != grid.size()) throw InvalidInput("field size does not match the grid");
  if (!u.allFinite()) throw NumericalFailure("non-finite field value");
}

Eigen::VectorXd hessian_eigenvalues(const Eigen::MatrixXd& H) {
  const auto m = H.rows();
  Eigen::VectorXd ev(m);
  if (m == 1) {
    ev[0] = H(0, 0);
  } else if (m == 2) {
    const double mean = 0.5 * (H(0, 0) + H(1, 1));
    const double half = 0.5 * (H(0, 0) - H(1, 1));
    const double rad = std::hypot(half, H(0, 1));
    ev << mean - rad, mean + rad;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
    ev = es.eigenvalues();
  }
  return ev;
}

// theta and |det(I + Hess)| per node
void angle_and_condition(const PeriodicGrid& grid, const Eigen::VectorXd& u, Eigen::VectorXd& theta,
                         Eigen::VectorXd& det) {
  theta.resize(grid.size());
  det.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    const Eigen::VectorXd ev = hessian_eigenvalues(node_hessian(grid, u, i));
    double th = 0.0, d = 1.0;
    for (double l : ev) {
      th += std::atan(l);
      d *= 1.0 + l;
    }
    theta[i] = th;
    det[i] = std::abs(d);
  });
}

std::vector<std::size_t> violating_nodes(const Eigen::VectorXd& det) {
  std::vector<std::size_t> bad;
  for (Eigen::Index i = 0; i < det.size(); ++i)
    if (!(det[i] >= kGraphTolerance)) bad.push_back(static_cast<std::size_t>(i));
  return bad;
}

[[noreturn]] void throw_violation(const std::vector<std::size_t>& bad, double suggested_dt) {
  std::ostringstream msg;
  msg << "graph condition fails at " << bad.size() << " node(s):";
  for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 8); ++k) msg << ' ' << bad[k];
  if (bad.size() > 8) msg << " ...";
  throw GraphConditionViolation(msg.str(), bad, suggested_dt);
}

double sup_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double amplitude(const Eigen::VectorXd& u) {
  if (u.size() == 0) return 0.0;
  return (u.array() - u.mean()).abs().maxCoeff();
}

// step sizes summing exactly to T, each at most dt
std::vector<double> step_sequence(double T, double dt) {
  const auto steps = static_cast<long>(std::ceil(T / dt - 1e-12));
  return std::vector<double>(static_cast<std::size_t>(std::max(steps, 0L)), steps > 0 ? T / steps : 0.0);
}

}  // namespace

Eigen::VectorXd lagrangian_angle(const PeriodicGrid& grid, const Eigen::VectorXd& u) {
  check_field(grid, u);
  Eigen::VectorXd theta, det;
  angle_and_condition(grid, u, theta, det);
  const auto bad = violating_nodes(det);
  if (!bad.empty()) throw_violation(bad, 0.0);
  return theta;
}

double graph_condition(const PeriodicGrid& grid, const Eigen::VectorXd& u) {
  check_field(grid, u);
  Eigen::VectorXd theta, det;
  angle_and_condition(grid, u, theta, det);
  return det.minCoeff();
}

Eigen::VectorXd grid_laplacian(const PeriodicGrid& grid, const Eigen::VectorXd& u) {
  const double h2 = grid.dx() * grid.dx();
  Eigen::VectorXd out(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) {
    double s = 0.0;
    for (int a = 0; a < grid.m(); ++a)
      s += (u[grid.shifted(i, a, 1)] - 2.0 * u[i] + u[grid.shifted(i, a, -1)]) / h2;
    out[i] = s;
  });
  return out;
}

Eigen::VectorXd implicit_solve(const PeriodicGrid& grid, double dt, const Eigen::VectorXd& b) {
  auto apply = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return x - dt * grid_laplacian(grid, x); };
  Eigen::VectorXd x = b;  // the operator is I + O(dt / dx^2): b is a good start
  Eigen::VectorXd r = b - apply(x);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  const int max_iter = 10 * static_cast<int>(std::sqrt(static_cast<double>(grid.size()))) + 200;
  for (int it = 0; it < max_iter && std::sqrt(rr) > 1e-15 * bnorm; ++it) {
    const Eigen::VectorXd ap = apply(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double a = rr / pap;
    x += a * p;
    r -= a * ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  if (!x.allFinite()) throw NumericalFailure("implicit solve produced non-finite values");
  if (std::sqrt(rr) > 1e-10 * bnorm) throw NumericalFailure("implicit solve did not converge");
  return x;
}

FlowState make_state(const PeriodicGrid& grid, Eigen::VectorXd u, double t) {
  Eigen::VectorXd theta = lagrangian_angle(grid, u);
  return FlowState{grid, std::move(u), t, std::move(theta)};
}

double default_dt(const PeriodicGrid& grid) { return 0.25 * grid.dx() * grid.dx(); }

FlowState flow_step(const FlowState& state, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("flow step needs dt > 0");
  const auto& grid = state.grid;
  const Eigen::VectorXd rhs = state.u + dt * (state.theta - grid_laplacian(grid, state.u));
  Eigen::VectorXd u = implicit_solve(grid, dt, rhs);
  Eigen::VectorXd theta, det;
  angle_and_condition(grid, u, theta, det);
  const auto bad = violating_nodes(det);
  if (!bad.empty()) throw_violation(bad, 0.5 * dt);
  return FlowState{grid, std::move(u), state.t + dt, std::move(theta)};
}

Eigen::VectorXd heat_step(const PeriodicGrid& grid, const Eigen::VectorXd& u, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("heat step needs dt > 0");
  return implicit_solve(grid, dt, u);
}

FlowRun run_flow(const FlowState& initial, double T, const FlowOptions& options) {
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidInput("flow end time must be finite and >= 0");
  const double dt = options.dt > 0.0 ? options.dt : default_dt(initial.grid);
  std::vector<double> stops = options.snapshot_times;
  for (double s : stops)
    if (!(s >= initial.t && s <= initial.t + T)) throw InvalidInput("snapshot time outside the run");
  stops.push_back(initial.t + T);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

  FlowRun run{initial, {}, {}, 0, 0};
  run.series.push_back({initial.t, sup_abs(initial.theta), amplitude(initial.u)});
  FlowState state = initial;
  double t0 = initial.t;
  for (double stop : stops) {
    for (double h : step_sequence(stop - t0, dt)) {
      // a rejected step is retried as 2^k substeps of h / 2^k
      int halvings = 0;
      for (;;) {
        try {
          FlowState next = state;
          const long parts = 1L << halvings;
          for (long p = 0; p < parts; ++p) {
            next = flow_step(next, h / static_cast<double>(parts));
            if (p + 1 < parts) run.series.push_back({next.t, sup_abs(next.theta), amplitude(next.u)});
          }
          state = std::move(next);
          run.accepted += static_cast<int>(parts);
          break;
        } catch (const GraphConditionViolation& e) {
          ++run.rejected;
          if (++halvings > options.max_halvings) throw;
        }
      }
      run.series.push_back({state.t, sup_abs(state.theta), amplitude(state.u)});
    }
    state.t = stop;  // remove drift from summing step sizes
    run.series.back().t = stop;
    t0 = stop;
    if (stop < initial.t + T || std::find(options.snapshot_times.begin(), options.snapshot_times.end(), stop) !=
                                    options.snapshot_times.end())
      run.snapshots.push_back(state);
  }
  run.final_state = state;
  return run;
}

Eigen::VectorXd run_heat(const PeriodicGrid& grid, const Eigen::VectorXd& u0, double T, double dt) {
  check_field(grid, u0);
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidInput("heat end time must be finite and >= 0");
  const double h = dt > 0.0 ? dt : default_dt(grid);
  Eigen::VectorXd u = u0;
  for (double s : step_sequence(T, h)) u = heat_step(grid, u, s);
  return u;
}

DefectReport linearization_defect(const PeriodicGrid& grid, const Eigen::VectorXd& u0,
                                  const std::vector<double>& epsilons, double T, double dt) {
  check_field(grid, u0);
  if (epsilons.empty()) throw InvalidInput("defect needs at least one epsilon");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw InvalidInput("epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw InvalidInput("epsilons must be strictly decreasing");
  }
  DefectReport report;
  report.epsilons = epsilons;
  FlowOptions options;
  options.dt = dt;
  for (double eps : epsilons) {
    const Eigen::VectorXd start = eps * u0;
    const FlowRun run = run_flow(make_state(grid, start), T, options);
    if (run.rejected > 0) throw NumericalFailure("defect runs must not reject steps; lower epsilon or dt");
    const Eigen::VectorXd lin = run_heat(grid, start, T, dt);
    report.defects.push_back(sup_abs(run.final_state.u - lin));
  }
  for (std::size_t i = 0; i + 1 < report.defects.size(); ++i)
    report.ratios.push_back(report.defects[i] > 0.0 ? report.defects[i + 1] / report.defects[i] : 0.0);
  return report;
}

std::vector<InitialCondition> flow_catalog() {
  return {
      {"single-mode", "0.1*sin(x1)"},
      {"two-mode", "0.1*(sin(x1) + cos(2*x2))"},
      {"product", "0.2*sin(x1)*sin(x2)"},
      {"diagonal", "0.1*cos(x1 + x2)"},
      {"mixed-scale", "0.05*(cos(x1) + 0.5*sin(3*x2) + 0.25*cos(2*x1 - x2))"},
  };
}

}  // namespace conic_lmcf
