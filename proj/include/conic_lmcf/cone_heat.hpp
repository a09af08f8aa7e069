#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace conic_lmcf {

/// Graded nodes r_j = R (j / n)^q, j = 1..n, on the cone segment (0, R].
class RadialGrid {
 public:
  RadialGrid(double R, int n_cells, double grading = 2.0);

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double R() const { return R_; }
  double r_min() const { return nodes_.front(); }
  int n_cells() const { return n_cells_; }
  double grading() const { return grading_; }

 private:
  double R_;
  int n_cells_;
  double grading_;
  std::vector<double> nodes_;
};

/// One link mode of a Laplace-type operator on the model cone:
///   L u = u'' + (m - 1) r^{-1} u' - lambda r^{-2} u + X_r u' + b u,
/// with |X_r| = O(r^{decay - 1}) and b = O(r^{decay - 2}), decay > 0.
struct LaplaceTypeSpec {
  int m = 3;
  double lambda = 0.0;
  std::function<double(double)> drift;      // X_r; empty means 0
  std::function<double(double)> potential;  // b; empty means 0
  double decay = 1.0;
};

void validate_spec(const LaplaceTypeSpec& spec);

/// Second-order three-point discretization of L on the interior nodes of a
/// RadialGrid. The innermost node is tied to its neighbours by
/// extrapolation of u / r^{alpha_+} linearly in r^2, which is exact for
/// r^{alpha_+} (c0 + c2 r^2).
class RadialOperator {
 public:
  RadialOperator(const LaplaceTypeSpec& spec, const RadialGrid& grid);

  /// L u at interior nodes; boundary entries are zero.
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

  const RadialGrid& grid() const { return grid_; }
  const LaplaceTypeSpec& spec() const { return spec_; }
  double alpha_plus() const { return alpha_plus_; }
  /// u_0 = w[0] u_1 + w[1] u_2
  std::array<double, 2> extrapolation_weights() const { return extrapolation_; }

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }
  const Eigen::VectorXd& upper() const { return upper_; }

 private:
  LaplaceTypeSpec spec_;
  RadialGrid grid_;
  double alpha_plus_;
  std::array<double, 2> extrapolation_;
  Eigen::VectorXd lower_, diagonal_, upper_;
};

RadialOperator radial_operator(const LaplaceTypeSpec& spec, const RadialGrid& grid);

enum class InnerBoundary { Extrapolate, DirichletZero, Dirichlet };

using Forcing = std::function<double(double t, double r)>;
using BoundaryData = std::function<double(double t)>;

struct SolveOptions {
  InnerBoundary inner = InnerBoundary::Extrapolate;
  BoundaryData inner_value;  // used with InnerBoundary::Dirichlet
  BoundaryData outer_value;  // Dirichlet data at r = R; empty means 0
};

struct ModeSolution {
  RadialGrid grid;
  std::vector<double> times;
  Eigen::MatrixXd values;  // row i: u(times[i], nodes)
  double lambda = 0.0;
  int m = 3;
};

/// Backward Euler for du/dt = L u + f, u(0, .) = 0, on [0, T]. The step
/// count is ceil(T / dt) with the step shortened to land on T.
ModeSolution solve_mode(const LaplaceTypeSpec& spec, const RadialGrid& grid, double T, double dt,
                        const Forcing& forcing, const SolveOptions& options = {});

}  // namespace conic_lmcf
