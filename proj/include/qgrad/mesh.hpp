#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <variant>
#include <vector>

#include "qgrad/model.hpp"

namespace qgrad {

enum class RadialKind { ball, annulus };

/// Uniform radial mesh r_i = a + i h, i = 0..M. Ball meshes keep r_0 = 0 as
/// an unknown (symmetry node); annulus meshes fix both ends. The unit
/// interval is the annulus with N = 1, a = 0, R = 1.
struct RadialMesh {
  int dimension = 3;
  RadialKind kind = RadialKind::ball;
  double inner = 0.0;
  double outer = 1.0;
  int M = 16;

  static RadialMesh ball(int N, double R, int M);
  static RadialMesh annulus(int N, double a, double R, int M);
  static RadialMesh interval(double length, int M);

  double h() const noexcept { return (outer - inner) / M; }
  double r(int i) const noexcept { return i == M ? outer : inner + i * h(); }
  int first_unknown() const noexcept { return kind == RadialKind::ball ? 0 : 1; }
  int num_nodes() const noexcept { return M + 1; }
  int num_unknowns() const noexcept { return M - first_unknown(); }

  friend bool operator==(const RadialMesh&, const RadialMesh&) = default;
};

/// Rectangle [0,width] x [0,height] with nx x ny interior nodes. Node (i,j),
/// 0 <= i <= nx+1, 0 <= j <= ny+1, is stored at i + j (nx+2).
struct Grid2D {
  double width = 1.0;
  double height = 1.0;
  int nx = 8;
  int ny = 8;

  static Grid2D make(double width, double height, int nx, int ny);

  double hx() const noexcept { return width / (nx + 1); }
  double hy() const noexcept { return height / (ny + 1); }
  int num_nodes() const noexcept { return (nx + 2) * (ny + 2); }
  int num_unknowns() const noexcept { return nx * ny; }
  int node(int i, int j) const noexcept { return i + j * (nx + 2); }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

using Mesh = std::variant<RadialMesh, Grid2D>;
using MeshPtr = std::shared_ptr<const Mesh>;

MeshPtr make_mesh(Mesh mesh);
/// Mesh matching a problem's domain: M radial intervals, or n x n interior nodes.
MeshPtr mesh_for(const DomainSpec& domain, int resolution);
/// The same mesh with spacing halved.
MeshPtr refine(const Mesh& mesh);

int num_nodes(const Mesh& mesh) noexcept;
int num_unknowns(const Mesh& mesh) noexcept;
/// Node index of the k-th unknown.
int unknown_node(const Mesh& mesh, int k) noexcept;
bool is_boundary(const Mesh& mesh, int node) noexcept;
Point node_point(const Mesh& mesh, int node) noexcept;

/// Node values on a mesh. Boundary entries hold the Dirichlet data (0 for
/// solution candidates) but operators accept any values there.
class DiscreteField {
 public:
  DiscreteField() = default;
  explicit DiscreteField(MeshPtr mesh);
  DiscreteField(MeshPtr mesh, std::vector<double> values);

  static DiscreteField sample(MeshPtr mesh, const std::function<double(Point)>& fn);

  const Mesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const noexcept { return mesh_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Values at unknown nodes, in unknown order.
  std::vector<double> unknowns() const;
  /// Field with the given unknowns and zero boundary data.
  static DiscreteField from_unknowns(MeshPtr mesh, const std::vector<double>& x);

  double sup_norm() const noexcept;
  bool same_mesh(const DiscreteField& other) const noexcept;

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

/// Throws ErrorKind::mesh_mismatch unless both fields live on equal meshes.
void require_same_mesh(const DiscreteField& a, const DiscreteField& b);

/// Discrete Laplacian at unknown nodes (zero at fixed boundary nodes).
DiscreteField laplacian(const DiscreteField& u);
/// Radial Laplacian; throws ErrorKind::mesh_mismatch if u is not on `mesh`.
DiscreteField radial_laplacian(const DiscreteField& u, const RadialMesh& mesh);

/// |grad u|^2 per axis as the product of the forward and backward differences
/// (u_{i+1} - u_i)(u_i - u_{i-1}) / h^2 at interior nodes, zero at the ball
/// center, squared second-order one-sided differences at boundary nodes.
/// The product is exact on linear u and keeps the boundary-adjacent equation
/// of mu |grad u|^2 / u solvable for every mu < 1.
DiscreteField gradient_sq(const DiscreteField& u);
DiscreteField gradient_sq(const DiscreteField& u, const Mesh& mesh);

/// Plain-text "r u" lines (radial) or CSV "x,y,u" (rectangle).
void write_field(std::ostream& os, const DiscreteField& u);

}  // namespace qgrad
