#include "conic_lmcf/link_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {
namespace {

// Groups sorted values whose relative spread is below `rel_tol`.
template <class TagFn>
std::vector<EigenEntry> group_values(std::vector<double> values, double rel_tol, TagFn tag) {
  std::sort(values.begin(), values.end());
  std::vector<EigenEntry> out;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i + 1;
    while (j < values.size() && values[j] - values[i] <= rel_tol * std::max(1.0, values[i])) ++j;
    double mean = 0.0;
    for (std::size_t k = i; k < j; ++k) mean += values[k];
    mean /= static_cast<double>(j - i);
    out.push_back({mean, static_cast<int>(j - i), tag(mean, j - i)});
    i = j;
  }
  return out;
}

void validate_torus(const FlatTorus& torus) {
  const auto& h = torus.metric;
  if (h.rows() < 1 || h.rows() != h.cols()) throw InvalidInput("torus metric must be square, dim >= 1");
  if (!h.allFinite()) throw InvalidInput("torus metric has non-finite entries");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw InvalidInput("torus metric is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) throw InvalidInput("torus metric is not positive definite");
}

}  // namespace

int link_dimension(const LinkSpec& link) {
  return std::visit(
      [](const auto& l) -> int {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, FlatTorus>) return static_cast<int>(l.metric.rows());
        else if constexpr (std::is_same_v<T, RoundSphere>) return l.dim;
        else return 2;
      },
      link);
}

void validate_link(const LinkSpec& link) {
  std::visit(
      [](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, FlatTorus>) validate_torus(l);
        else if constexpr (std::is_same_v<T, RoundSphere>) {
          if (l.dim < 1) throw InvalidInput("sphere dimension must be >= 1");
        } else validate_closed_mesh(l);
      },
      link);
}

std::pair<double, double> exponent_roots(double lambda, int m) {
  const double half = 0.5 * (m - 2);
  const double s = std::sqrt(half * half + lambda);
  return {-half + s, -half - s};
}

long spherical_harmonic_multiplicity(int dim, int l) {
  // harmonic polynomials of degree l in dim+1 variables: C(l+d, d) - C(l+d-2, d)
  auto binom = [](long n, long k) -> long {
    if (k < 0 || n < k) return 0;
    long r = 1;
    for (long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
  };
  return binom(l + dim, dim) - binom(l + dim - 2, dim);
}

Spectrum torus_eigenvalues(const FlatTorus& torus, double lambda_max) {
  validate_torus(torus);
  if (!(lambda_max >= 0.0)) throw InvalidInput("lambda_max must be >= 0");
  const int d = static_cast<int>(torus.metric.rows());
  const Eigen::MatrixXd dual = torus.metric.inverse();
  // k^T dual k <= lambda_max implies |k| <= sqrt(lambda_max / lambda_min(dual)).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dual, Eigen::EigenvaluesOnly);
  const long bound = static_cast<long>(std::floor(std::sqrt(lambda_max / es.eigenvalues().minCoeff()))) + 1;

  std::vector<double> values;
  Eigen::VectorXd k = Eigen::VectorXd::Constant(d, static_cast<double>(-bound));
  const double slack = 1e-12 * std::max(1.0, lambda_max);
  while (true) {
    const double lam = k.dot(dual * k);
    if (lam <= lambda_max + slack) values.push_back(std::max(0.0, lam));
    int axis = 0;
    while (axis < d && k[axis] >= bound) k[axis++] = static_cast<double>(-bound);
    if (axis == d) break;
    k[axis] += 1.0;
  }
  Spectrum s;
  s.lambda_max = lambda_max;
  s.entries = group_values(std::move(values), 1e-10, [](double, std::size_t n) {
    return "lattice shell, " + std::to_string(n) + " dual vectors";
  });
  return s;
}

Spectrum sphere_eigenvalues(const RoundSphere& sphere, double lambda_max) {
  if (sphere.dim < 1) throw InvalidInput("sphere dimension must be >= 1");
  if (!(lambda_max >= 0.0)) throw InvalidInput("lambda_max must be >= 0");
  Spectrum s;
  s.lambda_max = lambda_max;
  for (int l = 0;; ++l) {
    const double lam = static_cast<double>(l) * (l + sphere.dim - 1);
    if (lam > lambda_max) break;
    s.entries.push_back({lam, static_cast<int>(spherical_harmonic_multiplicity(sphere.dim, l)),
                         "spherical harmonics of degree " + std::to_string(l)});
  }
  return s;
}

Spectrum mesh_eigenvalues(const TriangleMesh& mesh, double lambda_max) {
  validate_closed_mesh(mesh);
  if (!(lambda_max >= 0.0)) throw InvalidInput("lambda_max must be >= 0");
  const int n = static_cast<int>(mesh.vertices.size());
  int count = std::min(n, 16);
  std::vector<double> values;
  while (true) {
    values = lowest_mesh_eigenvalues(mesh, count);
    if (values.back() > lambda_max || count == n) break;
    count = std::min(n, 2 * count);
  }
  values.erase(std::remove_if(values.begin(), values.end(), [&](double v) { return v > lambda_max; }),
               values.end());
  Spectrum s;
  s.lambda_max = lambda_max;
  s.discrete = true;
  std::size_t index = 0;
  s.entries = group_values(std::move(values), 1e-8, [&index](double, std::size_t k) {
    std::ostringstream tag;
    tag << "discrete eigenvectors " << index << ".." << index + k - 1;
    index += k;
    return tag.str();
  });
  return s;
}

Spectrum eigenvalues(const LinkSpec& link, double lambda_max) {
  return std::visit(
      [lambda_max](const auto& l) -> Spectrum {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, FlatTorus>) return torus_eigenvalues(l, lambda_max);
        else if constexpr (std::is_same_v<T, RoundSphere>) return sphere_eigenvalues(l, lambda_max);
        else return mesh_eigenvalues(l, lambda_max);
      },
      link);
}

}  // namespace conic_lmcf
