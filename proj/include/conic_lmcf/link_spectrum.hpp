#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "conic_lmcf/mesh.hpp"

namespace conic_lmcf {

/// Flat torus R^d / (2 pi Z)^d with constant metric `metric` in angle coordinates.
struct FlatTorus {
  Eigen::MatrixXd metric;
};

/// Unit round sphere S^dim.
struct RoundSphere {
  int dim = 2;
};

using LinkSpec = std::variant<FlatTorus, RoundSphere, TriangleMesh>;

/// Dimension of the link (m - 1 for the cone it spans in dimension m).
int link_dimension(const LinkSpec& link);

/// Throws InvalidInput when the link violates its invariants.
void validate_link(const LinkSpec& link);

/// Eigenvalue of -Delta_h with its multiplicity.
struct EigenEntry {
  double lambda = 0.0;
  int multiplicity = 0;
  std::string basis_tag;
};

/// All eigenvalues of -Delta_h in [0, lambda_max], strictly increasing.
/// `lambda_max` records how far the list is complete.
struct Spectrum {
  std::vector<EigenEntry> entries;
  double lambda_max = 0.0;
  bool discrete = false;  // true for mesh spectra
};

Spectrum eigenvalues(const LinkSpec& link, double lambda_max);

/// Dual-lattice eigenvalues k^T H^{-1} k <= lambda_max, grouped.
Spectrum torus_eigenvalues(const FlatTorus& torus, double lambda_max);
Spectrum sphere_eigenvalues(const RoundSphere& sphere, double lambda_max);
Spectrum mesh_eigenvalues(const TriangleMesh& mesh, double lambda_max);

/// Dimension of degree-l spherical harmonics on S^dim.
long spherical_harmonic_multiplicity(int dim, int l);

/// Roots of alpha (alpha + m - 2) = lambda, larger first.
std::pair<double, double> exponent_roots(double lambda, int m);

}  // namespace conic_lmcf
