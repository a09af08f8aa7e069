#include "conic_lmcf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "conic_lmcf/errors.hpp"

namespace conic_lmcf {
namespace {

std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    return tok;
  }
  throw InvalidInput("OFF: unexpected end of input");
}

double parse_number(const std::string& tok) {
  try {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw InvalidInput("OFF: bad number '" + tok + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InvalidInput("OFF: bad number '" + tok + "'");
  }
}

Eigen::Vector3d edge_vector(const TriangleMesh& mesh, int from, int to) {
  Eigen::Vector3d d = mesh.vertices[to] - mesh.vertices[from];
  if (mesh.period) {
    Eigen::Matrix2d basis;
    basis.col(0) = mesh.period->a;
    basis.col(1) = mesh.period->b;
    Eigen::Vector2d c = basis.inverse() * d.head<2>();
    c = c.array().round().matrix();
    d.head<2>() -= basis * c;
  }
  return d;
}

}  // namespace

TriangleMesh parse_off(std::istream& in) {
  std::string header = next_token(in);
  if (header != "OFF") throw InvalidInput("OFF: missing 'OFF' header");
  const long nv = std::lround(parse_number(next_token(in)));
  const long nf = std::lround(parse_number(next_token(in)));
  (void)next_token(in);  // edge count, unused
  if (nv <= 0 || nf <= 0) throw InvalidInput("OFF: empty mesh");

  TriangleMesh mesh;
  mesh.vertices.reserve(nv);
  for (long i = 0; i < nv; ++i) {
    Eigen::Vector3d p;
    for (int k = 0; k < 3; ++k) p[k] = parse_number(next_token(in));
    mesh.vertices.push_back(p);
  }
  mesh.faces.reserve(nf);
  for (long f = 0; f < nf; ++f) {
    const long arity = std::lround(parse_number(next_token(in)));
    if (arity != 3) throw InvalidInput("OFF: only triangular faces are supported");
    std::array<int, 3> tri{};
    for (int k = 0; k < 3; ++k) {
      const long idx = std::lround(parse_number(next_token(in)));
      if (idx < 0 || idx >= nv) throw InvalidInput("OFF: face index out of range");
      tri[k] = static_cast<int>(idx);
    }
    mesh.faces.push_back(tri);
  }
  return mesh;
}

TriangleMesh read_off(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open mesh file " + path.string());
  return parse_off(in);
}

void write_off(std::ostream& out, const TriangleMesh& mesh) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  out.precision(17);
  for (const auto& v : mesh.vertices) out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void validate_closed_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty() || mesh.faces.empty()) throw InvalidInput("mesh is empty");
  std::map<std::pair<int, int>, int> edge_faces;
  for (const auto& f : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k];
      const int b = f[(k + 1) % 3];
      if (a < 0 || b < 0 || a >= static_cast<int>(mesh.vertices.size()) ||
          b >= static_cast<int>(mesh.vertices.size()))
        throw InvalidInput("mesh face index out of range");
      if (a == b) throw InvalidInput("mesh face with repeated vertex");
      ++edge_faces[{std::min(a, b), std::max(a, b)}];
    }
    const Eigen::Vector3d e1 = edge_vector(mesh, f[0], f[1]);
    const Eigen::Vector3d e2 = edge_vector(mesh, f[0], f[2]);
    const double scale = std::max(e1.squaredNorm(), e2.squaredNorm());
    if (e1.cross(e2).norm() <= 1e-14 * scale || scale == 0.0)
      throw InvalidInput("degenerate mesh: zero-area face");
  }
  for (const auto& [edge, count] : edge_faces) {
    if (count != 2)
      throw InvalidInput("mesh is not closed: edge (" + std::to_string(edge.first) + "," +
                         std::to_string(edge.second) + ") has " + std::to_string(count) +
                         " faces");
  }
}

MeshOperators cotangent_operators(const TriangleMesh& mesh) {
  validate_closed_mesh(mesh);
  const int n = static_cast<int>(mesh.vertices.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.faces.size() * 12);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);

  for (const auto& f : mesh.faces) {
    const double area = 0.5 * edge_vector(mesh, f[0], f[1]).cross(edge_vector(mesh, f[0], f[2])).norm();
    for (int k = 0; k < 3; ++k) {
      const int i = f[k];
      const int j = f[(k + 1) % 3];
      const int o = f[(k + 2) % 3];
      // angle at o, opposite edge (i, j)
      const Eigen::Vector3d u = edge_vector(mesh, o, i);
      const Eigen::Vector3d v = edge_vector(mesh, o, j);
      const double cot = u.dot(v) / u.cross(v).norm();
      const double w = 0.5 * cot;
      triplets.emplace_back(i, j, -w);
      triplets.emplace_back(j, i, -w);
      triplets.emplace_back(i, i, w);
      triplets.emplace_back(j, j, w);
      mass[f[k]] += area / 3.0;
    }
  }
  MeshOperators ops;
  ops.stiffness.resize(n, n);
  ops.stiffness.setFromTriplets(triplets.begin(), triplets.end());
  ops.lumped_mass = std::move(mass);
  return ops;
}

std::vector<double> lowest_mesh_eigenvalues(const TriangleMesh& mesh, int count) {
  const MeshOperators ops = cotangent_operators(mesh);
  const int n = static_cast<int>(ops.lumped_mass.size());
  if (count <= 0) return {};
  count = std::min(count, n);
  const int block = std::min(n, count + std::max(6, count / 2));

  // Shift-invert subspace iteration with Rayleigh-Ritz, shift sigma = -1 so
  // that K - sigma M is positive definite.
  const double sigma = -1.0;
  Eigen::SparseMatrix<double> shifted = ops.stiffness;
  for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= sigma * ops.lumped_mass[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw NumericalFailure("mesh eigen: factorization failed");

  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, block);
  for (int j = 0; j < block; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = normal(rng);

  Eigen::VectorXd ritz = Eigen::VectorXd::Constant(block, std::numeric_limits<double>::infinity());
  for (int iter = 0; iter < 2000; ++iter) {
    Eigen::MatrixXd y = solver.solve(ops.lumped_mass.asDiagonal() * x);
    for (int j = 0; j < block; ++j) y.col(j) /= std::sqrt(y.col(j).dot(ops.lumped_mass.asDiagonal() * y.col(j)));
    const Eigen::MatrixXd ky = ops.stiffness * y;
    const Eigen::MatrixXd my = ops.lumped_mass.asDiagonal() * y;
    Eigen::MatrixXd kp = y.transpose() * ky;
    Eigen::MatrixXd mp = y.transpose() * my;
    kp = 0.5 * (kp + kp.transpose()).eval();
    mp = 0.5 * (mp + mp.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(kp, mp);
    if (rr.info() != Eigen::Success) throw NumericalFailure("mesh eigen: Rayleigh-Ritz failed", iter);
    x = y * rr.eigenvectors();
    const Eigen::VectorXd next = rr.eigenvalues();

    double change = 0.0;
    for (int j = 0; j < count; ++j)
      change = std::max(change, std::abs(next[j] - ritz[j]) / std::max(1.0, std::abs(next[j])));
    ritz = next;
    if (iter > 2 && change < 1e-13) break;
  }
  std::vector<double> out(ritz.data(), ritz.data() + count);
  for (double& v : out) v = std::max(v, 0.0);
  return out;
}

TriangleMesh flat_torus_mesh(const Eigen::Matrix2d& metric, int n) {
  if (n < 3) throw InvalidInput("flat torus mesh needs n >= 3");
  Eigen::LLT<Eigen::Matrix2d> llt(metric);
  if (llt.info() != Eigen::Success) throw InvalidInput("torus metric is not positive definite");
  // Embed angle coordinates isometrically: x = L^T phi with L L^T = metric.
  const Eigen::Matrix2d embed = llt.matrixL().transpose();
  const double two_pi = 2.0 * M_PI;

  TriangleMesh mesh;
  mesh.period = PeriodicFrame{embed * Eigen::Vector2d(two_pi, 0.0), embed * Eigen::Vector2d(0.0, two_pi)};
  mesh.vertices.reserve(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2d p = embed * Eigen::Vector2d(two_pi * i / n, two_pi * j / n);
      mesh.vertices.emplace_back(p.x(), p.y(), 0.0);
    }
  }
  const Eigen::Vector2d e0 = embed * Eigen::Vector2d(1.0, 0.0);
  const Eigen::Vector2d e1 = embed * Eigen::Vector2d(0.0, 1.0);
  const bool split_main = (e0 + e1).squaredNorm() <= (e0 - e1).squaredNorm();
  auto id = [n](int i, int j) { return ((j + n) % n) * n + ((i + n) % n); };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if (split_main) {
        mesh.faces.push_back({a, b, c});
        mesh.faces.push_back({a, c, d});
      } else {
        mesh.faces.push_back({a, b, d});
        mesh.faces.push_back({b, c, d});
      }
    }
  }
  return mesh;
}

}  // namespace conic_lmcf
