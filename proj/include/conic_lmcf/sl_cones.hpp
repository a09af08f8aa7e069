#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "conic_lmcf/exponent_table.hpp"
#include "conic_lmcf/link_spectrum.hpp"

namespace conic_lmcf {

/// A point of the link in its own coordinates: angles for a flat torus, a
/// unit vector of R^{dim+1} for a round sphere.
using LinkPoint = Eigen::VectorXd;
using LinkFunction = std::function<double(const LinkPoint&)>;

/// Embedding of the link into the unit sphere of C^m. The cone is
/// iota(sigma, r) = r * point(sigma).
class ConeEmbedding {
 public:
  virtual ~ConeEmbedding() = default;
  virtual Eigen::VectorXcd point(const LinkPoint& sigma) const = 0;
  /// Columns span the tangent space of the link at sigma, pushed into C^m.
  virtual Eigen::MatrixXcd tangent(const LinkPoint& sigma) const = 0;
};

/// z_j(phi) = sum_terms c * exp(i <freq, phi>) over a torus link.
class TrigMonomialEmbedding final : public ConeEmbedding {
 public:
  struct Term {
    std::complex<double> coefficient;
    Eigen::VectorXi frequency;
  };

  TrigMonomialEmbedding(int link_dim, std::vector<std::vector<Term>> coordinates);

  Eigen::VectorXcd point(const LinkPoint& phi) const override;
  Eigen::MatrixXcd tangent(const LinkPoint& phi) const override;
  int link_dim() const { return link_dim_; }
  const std::vector<std::vector<Term>>& coordinates() const { return coordinates_; }

 private:
  int link_dim_;
  std::vector<std::vector<Term>> coordinates_;
};

/// R^m inside C^m over the round sphere S^{m-1}.
class RealPlaneEmbedding final : public ConeEmbedding {
 public:
  explicit RealPlaneEmbedding(int m) : m_(m) {}
  Eigen::VectorXcd point(const LinkPoint& x) const override;
  Eigen::MatrixXcd tangent(const LinkPoint& x) const override;

 private:
  int m_;
};

struct SLCone {
  std::string name;
  int m = 3;
  LinkSpec link;
  std::shared_ptr<const ConeEmbedding> embedding;
  double phase_theta = 0.0;
  int dim_G = 0;

  Eigen::VectorXcd embed(const LinkPoint& sigma, double r) const { return r * embedding->point(sigma); }
};

/// Element (A, v, c) of u(m) + C^m + R.
struct MomentElement {
  Eigen::MatrixXcd A;
  Eigen::VectorXcd v;
  double c = 0.0;

  static MomentElement zero(int m);
};

/// Throws InvalidInput unless A + A^* = 0 within 1e-14 and shapes agree.
void validate_moment_element(const MomentElement& x);

/// mu_X(z) = i/2 sum a_ij z_i conj(z_j) + i/2 sum (v_i conj(z_i) - conj(v_i) z_i) + c.
double moment_eval(const MomentElement& x, const Eigen::VectorXcd& z);

/// Vector field of X at z: A z + v.
Eigen::VectorXcd moment_vector_field(const MomentElement& x, const Eigen::VectorXcd& z);

/// max over samples and real coordinate directions of |d mu_X - X _| omega'|,
/// with d mu_X from centered differences (step 1e-5).
double verify_hamiltonian(const MomentElement& x, std::span<const Eigen::VectorXcd> samples);

/// Real basis of su(m) (m^2 - 1 elements) and of C^m (2m elements).
std::vector<MomentElement> su_basis(int m);
std::vector<MomentElement> translation_basis(int m);

// Link geometry.
std::vector<LinkPoint> sample_link_points(const LinkSpec& link, int count, std::uint64_t seed);
/// Delta_h f at a link point by finite differences (torus: metric-weighted
/// second differences in angles; sphere: Euclidean Laplacian of the
/// degree-0 extension).
double link_laplacian(const LinkSpec& link, const LinkFunction& f, const LinkPoint& p);

struct ConeChecks {
  double norm_defect = 0.0;          // max | |point| - 1 |
  double lagrangian_residual = 0.0;  // max |omega'(e_a, e_b)| over the cone frame
  double special_residual = 0.0;     // max |Im(e^{-i theta} Omega'(frame))| / |Omega'(frame)|
  double measured_phase = 0.0;       // arg Omega'(frame) mod pi, in [0, pi)
};
ConeChecks check_cone(const SLCone& cone, std::span<const LinkPoint> samples);

/// Constant link metric of a torus-link cone from its embedding's tangents.
Eigen::MatrixXd induced_torus_metric(const ConeEmbedding& embedding, int link_dim);

struct ConeRestriction {
  LinkFunction phi;                         // mu_X restricted to the link
  int order = 0;                            // homogeneity order in {0, 1, 2}
  double harmonic_residual = 0.0;           // max |Delta_h phi + order (order + m - 2) phi|
  std::optional<double> projection_residual;  // torus links: relative L2 mass off the eigenspace
};

ConeRestriction restrict_to_cone(const SLCone& cone, const MomentElement& x);

/// Numerical rank of {iota^* mu_X : X in basis} sampled on the link.
int restricted_rank(const SLCone& cone, std::span<const MomentElement> basis, std::uint64_t seed = 7);

struct StabilityReport {
  int index = 0;
  int closed_count = 0;  // M^+(2), exponents in [0, 2] with multiplicity
  std::vector<std::pair<double, int>> harmonic_counts;  // (order, multiplicity) for D in [0, 2]
  int translation_rank = 0;  // rank of restricted C^m moment maps
  int su_rank = 0;           // rank of restricted su(m) moment maps
  int translation_bound = 0; // 2m
  int su_bound = 0;          // m^2 - 1 - dim G
  bool degenerate = false;
  std::vector<std::string> warnings;
};

StabilityReport stability_index(const SLCone& cone, const ExponentTable& table, std::uint64_t seed = 7);

}  // namespace conic_lmcf
