#include "conic_lmcf/sl_cones.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {
namespace {

using cd = std::complex<double>;
constexpr cd kI{0.0, 1.0};

// omega'(u, w) = Im(sum conj(u_k) w_k)
double omega(const Eigen::VectorXcd& u, const Eigen::VectorXcd& w) { return u.dot(w).imag(); }

const FlatTorus* as_torus(const LinkSpec& link) { return std::get_if<FlatTorus>(&link); }

void for_each_multi_index(int dim, int lo, int hi, const std::function<void(const Eigen::VectorXi&)>& body) {
  Eigen::VectorXi k = Eigen::VectorXi::Constant(dim, lo);
  while (true) {
    body(k);
    int axis = 0;
    while (axis < dim && k[axis] >= hi) k[axis++] = lo;
    if (axis == dim) return;
    ++k[axis];
  }
}

// Relative L2 mass of phi outside the Fourier modes k with k^T H^{-1} k = lambda.
double torus_projection_residual(const FlatTorus& torus, const LinkFunction& phi, double lambda) {
  const int d = static_cast<int>(torus.metric.rows());
  const int n = 16;
  const Eigen::MatrixXd dual = torus.metric.inverse();
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> values;
  for_each_multi_index(d, 0, n - 1, [&](const Eigen::VectorXi& j) {
    Eigen::VectorXd x = j.cast<double>() * (2.0 * M_PI / n);
    nodes.push_back(x);
    values.push_back(phi(x));
  });
  const double count = static_cast<double>(values.size());
  double on = 0.0, total = 0.0;
  for_each_multi_index(d, -n / 2, n / 2 - 1, [&](const Eigen::VectorXi& k) {
    cd coeff = 0.0;
    const Eigen::VectorXd kd = k.cast<double>();
    for (std::size_t s = 0; s < nodes.size(); ++s) coeff += values[s] * std::exp(-kI * kd.dot(nodes[s]));
    coeff /= count;
    const double mass = std::norm(coeff);
    total += mass;
    if (std::abs(kd.dot(dual * kd) - lambda) <= 1e-9 * std::max(1.0, lambda)) on += mass;
  });
  if (total <= 1e-300) return 0.0;
  return std::sqrt(std::max(0.0, total - on) / total);
}

}  // namespace

TrigMonomialEmbedding::TrigMonomialEmbedding(int link_dim, std::vector<std::vector<Term>> coordinates)
    : link_dim_(link_dim), coordinates_(std::move(coordinates)) {
  if (link_dim_ < 1) throw InvalidInput("trigonometric embedding needs link dimension >= 1");
  if (coordinates_.empty()) throw InvalidInput("trigonometric embedding has no coordinates");
  for (const auto& coord : coordinates_)
    for (const auto& t : coord)
      if (t.frequency.size() != link_dim_) throw InvalidInput("monomial frequency has wrong length");
}

Eigen::VectorXcd TrigMonomialEmbedding::point(const LinkPoint& phi) const {
  Eigen::VectorXcd z(coordinates_.size());
  for (std::size_t j = 0; j < coordinates_.size(); ++j) {
    cd s = 0.0;
    for (const auto& t : coordinates_[j]) s += t.coefficient * std::exp(kI * t.frequency.cast<double>().dot(phi));
    z[static_cast<Eigen::Index>(j)] = s;
  }
  return z;
}

Eigen::MatrixXcd TrigMonomialEmbedding::tangent(const LinkPoint& phi) const {
  Eigen::MatrixXcd out(coordinates_.size(), link_dim_);
  for (std::size_t j = 0; j < coordinates_.size(); ++j) {
    for (int a = 0; a < link_dim_; ++a) {
      cd s = 0.0;
      for (const auto& t : coordinates_[j])
        s += kI * static_cast<double>(t.frequency[a]) * t.coefficient *
             std::exp(kI * t.frequency.cast<double>().dot(phi));
      out(static_cast<Eigen::Index>(j), a) = s;
    }
  }
  return out;
}

Eigen::VectorXcd RealPlaneEmbedding::point(const LinkPoint& x) const {
  return (x / x.norm()).cast<cd>();
}

Eigen::MatrixXcd RealPlaneEmbedding::tangent(const LinkPoint& x) const {
  const Eigen::VectorXd n = x / x.norm();
  // Orthonormal complement of n via Householder QR.
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(n).householderQ() * Eigen::MatrixXd::Identity(m_, m_);
  return q.rightCols(m_ - 1).cast<cd>();
}

MomentElement MomentElement::zero(int m) {
  return {Eigen::MatrixXcd::Zero(m, m), Eigen::VectorXcd::Zero(m), 0.0};
}

void validate_moment_element(const MomentElement& x) {
  if (x.A.rows() != x.A.cols() || x.A.rows() != x.v.size() || x.v.size() < 1)
    throw InvalidInput("moment element shapes disagree");
  if ((x.A + x.A.adjoint()).cwiseAbs().maxCoeff() > 1e-14)
    throw InvalidInput("moment element matrix is not skew-adjoint");
  if (!std::isfinite(x.c)) throw InvalidInput("moment element constant is not finite");
}

double moment_eval(const MomentElement& x, const Eigen::VectorXcd& z) {
  // sum a_ij z_i conj(z_j) = z^T A conj(z)
  const cd quad = z.transpose() * x.A * z.conjugate();
  cd lin = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) lin += x.v[i] * std::conj(z[i]) - std::conj(x.v[i]) * z[i];
  return (0.5 * kI * (quad + lin)).real() + x.c;
}

Eigen::VectorXcd moment_vector_field(const MomentElement& x, const Eigen::VectorXcd& z) {
  // d mu_X(Y) = omega'(X, Y) forces X(z) = A^T z + v in this index convention:
  // mu's quadratic part z^T A conj(z) differentiates to Im(conj(A^T z) . Y).
  return x.A.transpose() * z + x.v;
}

double verify_hamiltonian(const MomentElement& x, std::span<const Eigen::VectorXcd> samples) {
  validate_moment_element(x);
  if (samples.empty()) throw InvalidInput("verify_hamiltonian needs samples");
  const double h = 1e-5;
  const Eigen::Index m = x.v.size();
  double worst = 0.0;
  for (const auto& z : samples) {
    const Eigen::VectorXcd field = moment_vector_field(x, z);
    for (Eigen::Index k = 0; k < m; ++k) {
      for (cd dir : {cd(1.0, 0.0), cd(0.0, 1.0)}) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(m);
        e[k] = dir;
        const double fd = (moment_eval(x, z + h * e) - moment_eval(x, z - h * e)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - omega(field, e)));
      }
    }
  }
  return worst;
}

std::vector<MomentElement> su_basis(int m) {
  std::vector<MomentElement> out;
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      MomentElement a = MomentElement::zero(m);
      a.A(j, k) = 1.0;
      a.A(k, j) = -1.0;
      out.push_back(a);
      MomentElement b = MomentElement::zero(m);
      b.A(j, k) = kI;
      b.A(k, j) = kI;
      out.push_back(b);
    }
  }
  for (int j = 0; j + 1 < m; ++j) {
    MomentElement d = MomentElement::zero(m);
    d.A(j, j) = kI;
    d.A(j + 1, j + 1) = -kI;
    out.push_back(d);
  }
  return out;
}

std::vector<MomentElement> translation_basis(int m) {
  std::vector<MomentElement> out;
  for (int j = 0; j < m; ++j) {
    for (cd dir : {cd(1.0, 0.0), cd(0.0, 1.0)}) {
      MomentElement e = MomentElement::zero(m);
      e.v[j] = dir;
      out.push_back(e);
    }
  }
  return out;
}

std::vector<LinkPoint> sample_link_points(const LinkSpec& link, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::normal_distribution<double> normal;
  std::vector<LinkPoint> out;
  out.reserve(count);
  const int d = link_dimension(link);
  for (int s = 0; s < count; ++s) {
    if (as_torus(link)) {
      LinkPoint p(d);
      for (int a = 0; a < d; ++a) p[a] = angle(rng);
      out.push_back(p);
    } else if (std::holds_alternative<RoundSphere>(link)) {
      LinkPoint p(d + 1);
      for (int a = 0; a <= d; ++a) p[a] = normal(rng);
      out.push_back(p / p.norm());
    } else {
      throw InvalidInput("mesh links have no coordinate sampler");
    }
  }
  return out;
}

double link_laplacian(const LinkSpec& link, const LinkFunction& f, const LinkPoint& p) {
  const double h = 2e-4;
  if (const auto* torus = as_torus(link)) {
    const Eigen::MatrixXd dual = torus->metric.inverse();
    const Eigen::Index d = dual.rows();
    const double f0 = f(p);
    double sum = 0.0;
    for (Eigen::Index a = 0; a < d; ++a) {
      Eigen::VectorXd ea = Eigen::VectorXd::Unit(d, a) * h;
      sum += dual(a, a) * (f(p + ea) - 2.0 * f0 + f(p - ea)) / (h * h);
      for (Eigen::Index b = a + 1; b < d; ++b) {
        Eigen::VectorXd eb = Eigen::VectorXd::Unit(d, b) * h;
        const double mixed = (f(p + ea + eb) - f(p + ea - eb) - f(p - ea + eb) + f(p - ea - eb)) / (4.0 * h * h);
        sum += 2.0 * dual(a, b) * mixed;
      }
    }
    return sum;
  }
  if (std::holds_alternative<RoundSphere>(link)) {
    auto ext = [&f](const Eigen::VectorXd& x) { return f(x / x.norm()); };
    const double f0 = ext(p);
    double sum = 0.0;
    for (Eigen::Index a = 0; a < p.size(); ++a) {
      Eigen::VectorXd ea = Eigen::VectorXd::Unit(p.size(), a) * h;
      sum += (ext(p + ea) - 2.0 * f0 + ext(p - ea)) / (h * h);
    }
    return sum;
  }
  throw InvalidInput("link_laplacian: mesh links are not supported");
}

ConeChecks check_cone(const SLCone& cone, std::span<const LinkPoint> samples) {
  ConeChecks out;
  const double theta = cone.phase_theta;
  double phase_sum_cos = 0.0, phase_sum_sin = 0.0;
  for (const auto& s : samples) {
    const Eigen::VectorXcd z = cone.embedding->point(s);
    out.norm_defect = std::max(out.norm_defect, std::abs(z.norm() - 1.0));
    Eigen::MatrixXcd frame(cone.m, cone.m);
    frame.col(0) = z;  // d/dr of r * point at r = 1
    frame.rightCols(cone.m - 1) = cone.embedding->tangent(s);
    for (int a = 0; a < cone.m; ++a)
      for (int b = a + 1; b < cone.m; ++b)
        out.lagrangian_residual = std::max(out.lagrangian_residual, std::abs(omega(frame.col(a), frame.col(b))));
    const cd vol = frame.determinant();
    if (std::abs(vol) <= 1e-300) {
      out.special_residual = std::numeric_limits<double>::infinity();
      continue;
    }
    out.special_residual = std::max(out.special_residual, std::abs((std::exp(-kI * theta) * vol).imag()) / std::abs(vol));
    // arg mod pi: double the angle so orientation flips agree
    const double doubled = 2.0 * std::arg(vol);
    phase_sum_cos += std::cos(doubled);
    phase_sum_sin += std::sin(doubled);
  }
  double phase = 0.5 * std::atan2(phase_sum_sin, phase_sum_cos);
  if (phase < 0.0) phase += M_PI;
  if (phase >= M_PI - 1e-12) phase = 0.0;
  out.measured_phase = phase;
  return out;
}

Eigen::MatrixXd induced_torus_metric(const ConeEmbedding& embedding, int link_dim) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  Eigen::MatrixXd reference;
  for (int s = 0; s < 8; ++s) {
    LinkPoint p(link_dim);
    for (int a = 0; a < link_dim; ++a) p[a] = angle(rng);
    const Eigen::MatrixXcd t = embedding.tangent(p);
    const Eigen::MatrixXd gram = (t.adjoint() * t).real();
    if (s == 0) reference = gram;
    else if ((gram - reference).cwiseAbs().maxCoeff() > 1e-10)
      throw InvalidInput("embedding does not induce a constant (flat) torus metric");
  }
  return reference;
}

ConeRestriction restrict_to_cone(const SLCone& cone, const MomentElement& x) {
  validate_moment_element(x);
  if (x.v.size() != cone.m) throw InvalidInput("moment element dimension does not match the cone");
  ConeRestriction out;
  auto emb = cone.embedding;
  out.phi = [emb, x](const LinkPoint& s) { return moment_eval(x, emb->point(s)); };

  const auto samples = sample_link_points(cone.link, 16, 3);
  double scale = 0.0;
  for (const auto& s : samples) scale = std::max(scale, std::abs(moment_eval(x, cone.embed(s, 1.0))));

  int order = -1;
  if (scale <= 1e-14) {
    order = 0;
  } else {
    for (int alpha : {0, 1, 2}) {
      bool fits = true;
      for (const auto& s : samples) {
        const double f1 = moment_eval(x, cone.embed(s, 1.0));
        const double f2 = moment_eval(x, cone.embed(s, 2.0));
        const double fh = moment_eval(x, cone.embed(s, 0.5));
        const double tol = 1e-8 * std::max(1.0, 4.0 * scale);
        if (std::abs(f2 - std::ldexp(f1, alpha)) > tol || std::abs(fh - std::ldexp(f1, -alpha)) > tol) {
          fits = false;
          break;
        }
      }
      if (fits) {
        order = alpha;
        break;
      }
    }
  }
  if (order < 0) throw MixedHomogeneity("moment map restriction has no pure homogeneity order in {0,1,2}");
  out.order = order;
  if (scale <= 1e-14) {
    // vanishes on the cone: harmonic of every order, nothing off any eigenspace
    if (as_torus(cone.link)) out.projection_residual = 0.0;
    return out;
  }

  const double eig = static_cast<double>(order) * (order + cone.m - 2);
  for (const auto& s : samples)
    out.harmonic_residual =
        std::max(out.harmonic_residual, std::abs(link_laplacian(cone.link, out.phi, s) + eig * out.phi(s)));
  if (const auto* torus = as_torus(cone.link)) out.projection_residual = torus_projection_residual(*torus, out.phi, eig);
  return out;
}

int restricted_rank(const SLCone& cone, std::span<const MomentElement> basis, std::uint64_t seed) {
  if (basis.empty()) return 0;
  const auto samples = sample_link_points(cone.link, 64, seed);
  Eigen::MatrixXd values(samples.size(), basis.size());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Eigen::VectorXcd z = cone.embedding->point(samples[s]);
    for (std::size_t b = 0; b < basis.size(); ++b)
      values(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(b)) = moment_eval(basis[b], z);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(values);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 1e-300) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-9 * sv[0]) ++rank;
  return rank;
}

StabilityReport stability_index(const SLCone& cone, const ExponentTable& table, std::uint64_t seed) {
  if (table.m() != cone.m) throw InvalidInput("exponent table dimension does not match the cone");
  if (table.window().lo > table.tolerance() || table.window().hi < 2.0 - table.tolerance())
    throw WindowTooSmall("stability index needs an exponent window covering [0, 2]");
  StabilityReport rep;
  rep.closed_count = table.count_M_closed(2.0);
  rep.index = rep.closed_count - cone.m * cone.m - 2 * cone.m + cone.dim_G;
  for (const auto& e : table.entries())
    if (e.alpha >= -table.tolerance() && e.alpha <= 2.0 + table.tolerance()) rep.harmonic_counts.emplace_back(e.alpha, e.multiplicity);

  const auto translations = translation_basis(cone.m);
  const auto su = su_basis(cone.m);
  rep.translation_rank = restricted_rank(cone, translations, seed);
  rep.su_rank = restricted_rank(cone, su, seed);
  rep.translation_bound = 2 * cone.m;
  rep.su_bound = cone.m * cone.m - 1 - cone.dim_G;
  if (rep.translation_rank < rep.translation_bound) {
    rep.degenerate = true;
    rep.warnings.push_back("C^m moment maps restrict non-injectively (rank " + std::to_string(rep.translation_rank) +
                           " < " + std::to_string(rep.translation_bound) + ")");
  }
  if (rep.su_rank < rep.su_bound) {
    rep.degenerate = true;
    rep.warnings.push_back("su(m) moment maps restrict with rank " + std::to_string(rep.su_rank) + " < " +
                           std::to_string(rep.su_bound));
  }
  if (rep.index < 0) rep.warnings.push_back("negative stability index: harmonic counts fall below the moment-map bounds");
  return rep;
}

}  // namespace conic_lmcf
