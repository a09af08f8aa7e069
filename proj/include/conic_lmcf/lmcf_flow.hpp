#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace conic_lmcf {

/// Uniform periodic grid on [0, 2 pi)^m, N points per axis, axis 0 fastest.
class PeriodicGrid {
 public:
  PeriodicGrid(int m, int N);

  int m() const { return m_; }
  int N() const { return N_; }
  double dx() const { return dx_; }
  std::size_t size() const { return size_; }

  /// Coordinates of node `index`.
  std::vector<double> point(std::size_t index) const;
  /// Index of the node shifted by `offset` (periodic).
  std::size_t shifted(std::size_t index, int axis, int offset) const;
  /// Samples f at every node.
  Eigen::VectorXd sample(const std::function<double(const std::vector<double>&)>& f) const;

 private:
  int m_;
  int N_;
  double dx_;
  std::size_t size_;
  std::vector<std::size_t> stride_;
};

/// Centered-difference Hessian of u at one node (m x m, symmetric).
Eigen::MatrixXd node_hessian(const PeriodicGrid& grid, const Eigen::VectorXd& u, std::size_t node);

/// Lagrangian angle of the graph of du: per node, the sum of arctan over the
/// eigenvalues of the centered-difference Hessian. Throws
/// GraphConditionViolation listing the nodes where |det(I + Hess u)| < 1e-6.
Eigen::VectorXd lagrangian_angle(const PeriodicGrid& grid, const Eigen::VectorXd& u);

/// min over nodes of |det(I + Hess u)|.
double graph_condition(const PeriodicGrid& grid, const Eigen::VectorXd& u);

inline constexpr double kGraphTolerance = 1e-6;

/// Second-difference Laplacian; the trace of node_hessian.
Eigen::VectorXd grid_laplacian(const PeriodicGrid& grid, const Eigen::VectorXd& u);

/// Solves (I - dt Lap) x = b by conjugate gradients. Every operation is
/// node-local or a global scalar, so data invariant under a grid translation
/// stays invariant bitwise.
Eigen::VectorXd implicit_solve(const PeriodicGrid& grid, double dt, const Eigen::VectorXd& b);

struct FlowState {
  PeriodicGrid grid;
  Eigen::VectorXd u;
  double t = 0.0;
  Eigen::VectorXd theta;
};

/// State at time t with theta computed from u.
FlowState make_state(const PeriodicGrid& grid, Eigen::VectorXd u, double t = 0.0);

/// 0.25 dx^2
double default_dt(const PeriodicGrid& grid);

/// Semi-implicit step: (I - dt Lap) u' = u + dt (theta(u) - Lap u).
/// A graph-condition violation in the new state rejects the step with
/// suggested_dt = dt / 2.
FlowState flow_step(const FlowState& state, double dt);

/// Backward Euler for the linear heat flow u_t = Lap u.
Eigen::VectorXd heat_step(const PeriodicGrid& grid, const Eigen::VectorXd& u, double dt);

struct FlowSample {
  double t = 0.0;
  double sup_theta = 0.0;
  double amplitude = 0.0;  // sup |u - mean u|
};

struct FlowRun {
  FlowState final_state;
  std::vector<FlowSample> series;  // initial state and every accepted step
  std::vector<FlowState> snapshots;
  int accepted = 0;
  int rejected = 0;
};

struct FlowOptions {
  double dt = 0.0;                     // 0 means default_dt
  std::vector<double> snapshot_times;  // states recorded at these times (step lands on them)
  int max_halvings = 12;
};

/// Integrates the flow to time T, halving dt after each rejected step.
FlowRun run_flow(const FlowState& initial, double T, const FlowOptions& options = {});

/// Linear heat flow to time T with the same step sequence run_flow uses
/// without rejections.
Eigen::VectorXd run_heat(const PeriodicGrid& grid, const Eigen::VectorXd& u0, double T, double dt = 0.0);

struct DefectReport {
  std::vector<double> epsilons;
  std::vector<double> defects;  // max |nonlinear - linear| at T
  std::vector<double> ratios;   // defects[i + 1] / defects[i]
};

/// For each epsilon, runs the nonlinear flow and the heat flow from
/// epsilon * u0 to time T and records the max-norm difference.
DefectReport linearization_defect(const PeriodicGrid& grid, const Eigen::VectorXd& u0,
                                  const std::vector<double>& epsilons, double T, double dt = 0.0);

struct InitialCondition {
  std::string name;
  std::string expression;  // see Expression
};

/// Small smooth initial potentials used by the examples and the tests.
std::vector<InitialCondition> flow_catalog();

}  // namespace conic_lmcf
