#include "conic_lmcf/cone_heat.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "conic_lmcf/errors.hpp"
#include "conic_lmcf/link_spectrum.hpp"

namespace conic_lmcf {

RadialGrid::RadialGrid(double R, int n_cells, double grading) : R_(R), n_cells_(n_cells), grading_(grading) {
  if (!(R > 0.0) || !std::isfinite(R)) throw InvalidInput("radial grid needs R > 0");
  if (n_cells < 4) throw InvalidInput("radial grid needs at least 4 cells");
  if (!(grading >= 1.0)) throw InvalidInput("radial grid grading must be >= 1");
  nodes_.reserve(static_cast<std::size_t>(n_cells));
  for (int j = 1; j <= n_cells; ++j) nodes_.push_back(R * std::pow(static_cast<double>(j) / n_cells, grading));
  nodes_.back() = R;
}

void validate_spec(const LaplaceTypeSpec& spec) {
  if (spec.m < 3) throw InvalidInput("Laplace-type operators here need m >= 3");
  if (!(spec.lambda >= 0.0)) throw InvalidInput("mode eigenvalue must be >= 0");
  if (!(spec.decay > 0.0)) throw InvalidInput("decay rate must be > 0: operator is not of Laplace type");
}

RadialOperator::RadialOperator(const LaplaceTypeSpec& spec, const RadialGrid& grid) : spec_(spec), grid_(grid) {
  validate_spec(spec_);
  const auto& r = grid_.nodes();
  const Eigen::Index n = static_cast<Eigen::Index>(r.size());
  alpha_plus_ = exponent_roots(spec_.lambda, spec_.m).first;

  lower_ = Eigen::VectorXd::Zero(n);
  diagonal_ = Eigen::VectorXd::Zero(n);
  upper_ = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double hm = r[i] - r[i - 1];
    const double hp = r[i + 1] - r[i];
    const double drift = spec_.drift ? spec_.drift(r[i]) : 0.0;
    const double pot = spec_.potential ? spec_.potential(r[i]) : 0.0;
    if (!std::isfinite(drift) || !std::isfinite(pot))
      throw InvalidInput("drift or potential is not finite on the grid");
    const double c = (spec_.m - 1) / r[i] + drift;
    lower_[i] = 2.0 / (hm * (hm + hp)) - c * hp / (hm * (hm + hp));
    upper_[i] = 2.0 / (hp * (hm + hp)) + c * hm / (hp * (hm + hp));
    diagonal_[i] = -2.0 / (hm * hp) + c * (hp - hm) / (hm * hp) + pot - spec_.lambda / (r[i] * r[i]);
  }
  const double a = alpha_plus_;
  const double theta = (r[0] * r[0] - r[1] * r[1]) / (r[2] * r[2] - r[1] * r[1]);
  extrapolation_ = {(1.0 - theta) * std::pow(r[0] / r[1], a), theta * std::pow(r[0] / r[2], a)};
}

Eigen::VectorXd RadialOperator::apply(const Eigen::VectorXd& u) const {
  const Eigen::Index n = diagonal_.size();
  if (u.size() != n) throw InvalidInput("grid function has the wrong length");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i + 1 < n; ++i) out[i] = lower_[i] * u[i - 1] + diagonal_[i] * u[i] + upper_[i] * u[i + 1];
  return out;
}

RadialOperator radial_operator(const LaplaceTypeSpec& spec, const RadialGrid& grid) { return {spec, grid}; }

ModeSolution solve_mode(const LaplaceTypeSpec& spec, const RadialGrid& grid, double T, double dt,
                        const Forcing& forcing, const SolveOptions& options) {
  if (!(T > 0.0) || !(dt > 0.0)) throw InvalidInput("solve_mode needs T > 0 and dt > 0");
  if (!forcing) throw InvalidInput("solve_mode needs a forcing profile");
  if (options.inner == InnerBoundary::Dirichlet && !options.inner_value)
    throw InvalidInput("Dirichlet inner boundary needs boundary data");
  const RadialOperator op(spec, grid);
  const auto& r = grid.nodes();
  const Eigen::Index n = static_cast<Eigen::Index>(r.size());
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(T / dt - 1e-9)));
  const double h = T / static_cast<double>(steps);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(3 * n + 3));
  trip.emplace_back(0, 0, 1.0);
  if (options.inner == InnerBoundary::Extrapolate) {
    const auto w = op.extrapolation_weights();
    trip.emplace_back(0, 1, -w[0]);
    trip.emplace_back(0, 2, -w[1]);
  }
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    trip.emplace_back(i, i - 1, -h * op.lower()[i]);
    trip.emplace_back(i, i, 1.0 - h * op.diagonal()[i]);
    trip.emplace_back(i, i + 1, -h * op.upper()[i]);
  }
  trip.emplace_back(n - 1, n - 1, 1.0);
  Eigen::SparseMatrix<double> system(n, n);
  system.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) throw NumericalFailure("solve_mode: backward Euler system is singular", 1);

  ModeSolution sol{grid, {}, Eigen::MatrixXd::Zero(steps + 1, n), spec.lambda, spec.m};
  sol.times.reserve(static_cast<std::size_t>(steps + 1));
  sol.times.push_back(0.0);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd rhs(n);
  for (long s = 1; s <= steps; ++s) {
    const double t = (s == steps) ? T : h * static_cast<double>(s);
    for (Eigen::Index i = 1; i + 1 < n; ++i) rhs[i] = u[i] + h * forcing(t, r[i]);
    rhs[0] = options.inner == InnerBoundary::Dirichlet ? options.inner_value(t) : 0.0;
    rhs[n - 1] = options.outer_value ? options.outer_value(t) : 0.0;
    if (!rhs.allFinite()) {
      std::ostringstream msg;
      msg << "solve_mode: forcing or boundary data not finite at step " << s;
      throw NumericalFailure(msg.str(), s);
    }
    u = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !u.allFinite()) {
      std::ostringstream msg;
      msg << "solve_mode: linear solve failed at step " << s;
      throw NumericalFailure(msg.str(), s);
    }
    sol.times.push_back(t);
    sol.values.row(s) = u.transpose();
  }
  return sol;
}

}  // namespace conic_lmcf
