#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace conic_lmcf {

/// Period lattice for meshes that live in the z = 0 plane and wrap around.
/// Edge vectors are reduced to their minimum image before any geometry.
struct PeriodicFrame {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
};

struct TriangleMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;
  std::optional<PeriodicFrame> period;
};

TriangleMesh parse_off(std::istream& in);
TriangleMesh read_off(const std::filesystem::path& path);
void write_off(std::ostream& out, const TriangleMesh& mesh);

/// Throws InvalidInput unless every edge is shared by exactly two faces and
/// every face has positive area.
void validate_closed_mesh(const TriangleMesh& mesh);

/// Cotangent stiffness matrix (positive semidefinite, rows sum to zero) and
/// barycentric lumped mass.
struct MeshOperators {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd lumped_mass;
};

MeshOperators cotangent_operators(const TriangleMesh& mesh);

/// Smallest `count` eigenvalues of stiffness x = lambda * mass x, ascending.
std::vector<double> lowest_mesh_eigenvalues(const TriangleMesh& mesh, int count);

/// Periodic triangulation of the flat torus R^2 / (2 pi Z)^2 with constant
/// metric `metric` in angle coordinates, n x n vertices. Each grid cell is
/// split along its shorter diagonal.
TriangleMesh flat_torus_mesh(const Eigen::Matrix2d& metric, int n);

}  // namespace conic_lmcf
