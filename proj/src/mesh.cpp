#include "qgrad/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "qgrad/error.hpp"

namespace qgrad {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_radial(int N, double a, double R, int M) {
  if (N < 1) throw Error(ErrorKind::invalid_dimension, "radial mesh needs N >= 1");
  if (M < 16) throw Error(ErrorKind::invalid_spec, "radial mesh needs M >= 16");
  if (!(a >= 0.0 && a < R)) throw Error(ErrorKind::invalid_spec, "radial mesh needs 0 <= a < R");
}

// %.17g keeps dumps exact and locale independent.
void put(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

RadialMesh RadialMesh::ball(int N, double R, int M) {
  check_radial(N, 0.0, R, M);
  return {N, RadialKind::ball, 0.0, R, M};
}

RadialMesh RadialMesh::annulus(int N, double a, double R, int M) {
  check_radial(N, a, R, M);
  return {N, RadialKind::annulus, a, R, M};
}

RadialMesh RadialMesh::interval(double length, int M) { return annulus(1, 0.0, length, M); }

Grid2D Grid2D::make(double width, double height, int nx, int ny) {
  if (nx < 8 || ny < 8) throw Error(ErrorKind::invalid_spec, "grid needs nx, ny >= 8");
  if (!(width > 0.0 && height > 0.0)) throw Error(ErrorKind::invalid_spec, "grid extents must be positive");
  return {width, height, nx, ny};
}

MeshPtr make_mesh(Mesh mesh) { return std::make_shared<const Mesh>(std::move(mesh)); }

MeshPtr mesh_for(const DomainSpec& domain, int resolution) {
  switch (domain.kind) {
    case DomainKind::radial_ball:
      return make_mesh(RadialMesh::ball(domain.dimension, domain.outer_radius, resolution));
    case DomainKind::radial_annulus:
      return make_mesh(
          RadialMesh::annulus(domain.dimension, domain.inner_radius, domain.outer_radius, resolution));
    case DomainKind::rectangle:
      return make_mesh(Grid2D::make(domain.width, domain.height, resolution, resolution));
  }
  throw Error(ErrorKind::invalid_spec, "unknown domain kind");
}

MeshPtr refine(const Mesh& mesh) {
  return std::visit(overloaded{[](const RadialMesh& m) {
                                 RadialMesh r = m;
                                 r.M *= 2;
                                 return make_mesh(r);
                               },
                               [](const Grid2D& g) {
                                 return make_mesh(Grid2D{g.width, g.height, 2 * g.nx + 1, 2 * g.ny + 1});
                               }},
                    mesh);
}

int num_nodes(const Mesh& mesh) noexcept {
  return std::visit([](const auto& m) { return m.num_nodes(); }, mesh);
}

int num_unknowns(const Mesh& mesh) noexcept {
  return std::visit([](const auto& m) { return m.num_unknowns(); }, mesh);
}

int unknown_node(const Mesh& mesh, int k) noexcept {
  return std::visit(overloaded{[k](const RadialMesh& m) { return m.first_unknown() + k; },
                               [k](const Grid2D& g) { return g.node(1 + k % g.nx, 1 + k / g.nx); }},
                    mesh);
}

bool is_boundary(const Mesh& mesh, int node) noexcept {
  return std::visit(overloaded{[node](const RadialMesh& m) { return node < m.first_unknown() || node == m.M; },
                               [node](const Grid2D& g) {
                                 const int i = node % (g.nx + 2);
                                 const int j = node / (g.nx + 2);
                                 return i == 0 || j == 0 || i == g.nx + 1 || j == g.ny + 1;
                               }},
                    mesh);
}

Point node_point(const Mesh& mesh, int node) noexcept {
  return std::visit(overloaded{[node](const RadialMesh& m) { return Point{m.r(node), 0.0}; },
                               [node](const Grid2D& g) {
                                 const int i = node % (g.nx + 2);
                                 const int j = node / (g.nx + 2);
                                 const double x = i == g.nx + 1 ? g.width : i * g.hx();
                                 const double y = j == g.ny + 1 ? g.height : j * g.hy();
                                 return Point{x, y};
                               }},
                    mesh);
}

// ---- DiscreteField -------------------------------------------------------

DiscreteField::DiscreteField(MeshPtr mesh) : mesh_(std::move(mesh)) {
  if (!mesh_) throw Error(ErrorKind::mesh_mismatch, "field without mesh");
  values_.assign(num_nodes(*mesh_), 0.0);
}

DiscreteField::DiscreteField(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw Error(ErrorKind::mesh_mismatch, "field without mesh");
  if (values_.size() != static_cast<std::size_t>(num_nodes(*mesh_))) {
    throw Error(ErrorKind::mesh_mismatch, "field size does not match mesh");
  }
}

DiscreteField DiscreteField::sample(MeshPtr mesh, const std::function<double(Point)>& fn) {
  DiscreteField u(std::move(mesh));
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = fn(node_point(u.mesh(), static_cast<int>(i)));
  return u;
}

std::vector<double> DiscreteField::unknowns() const {
  const int n = num_unknowns(*mesh_);
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = values_[unknown_node(*mesh_, k)];
  return x;
}

DiscreteField DiscreteField::from_unknowns(MeshPtr mesh, const std::vector<double>& x) {
  DiscreteField u(std::move(mesh));
  const int n = num_unknowns(u.mesh());
  if (x.size() != static_cast<std::size_t>(n)) throw Error(ErrorKind::mesh_mismatch, "unknown vector size");
  for (int k = 0; k < n; ++k) u[unknown_node(u.mesh(), k)] = x[k];
  return u;
}

double DiscreteField::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool DiscreteField::same_mesh(const DiscreteField& other) const noexcept {
  return mesh_ && other.mesh_ && (mesh_ == other.mesh_ || *mesh_ == *other.mesh_);
}

void require_same_mesh(const DiscreteField& a, const DiscreteField& b) {
  if (!a.same_mesh(b)) throw Error(ErrorKind::mesh_mismatch, "fields live on different meshes");
}

// ---- operators -----------------------------------------------------------

namespace {

DiscreteField radial_lap(const DiscreteField& u, const RadialMesh& m) {
  DiscreteField out(u.mesh_ptr());
  const double h = m.h();
  const double h2 = h * h;
  const int N = m.dimension;
  if (m.kind == RadialKind::ball) out[0] = 2.0 * N * (u[1] - u[0]) / h2;
  for (int i = 1; i < m.M; ++i) {
    const double second = ((u[i + 1] - u[i]) - (u[i] - u[i - 1])) / h2;
    const double first = (u[i + 1] - u[i - 1]) / (2.0 * h);
    out[i] = second + (N - 1) / m.r(i) * first;
  }
  return out;
}

DiscreteField grid_lap(const DiscreteField& u, const Grid2D& g) {
  DiscreteField out(u.mesh_ptr());
  const double hx2 = g.hx() * g.hx();
  const double hy2 = g.hy() * g.hy();
  for (int j = 1; j <= g.ny; ++j) {
    for (int i = 1; i <= g.nx; ++i) {
      const int c = g.node(i, j);
      const double dxx = ((u[c + 1] - u[c]) - (u[c] - u[c - 1])) / hx2;
      const int s = g.nx + 2;
      const double dyy = ((u[c + s] - u[c]) - (u[c] - u[c - s])) / hy2;
      out[c] = dxx + dyy;
    }
  }
  return out;
}

// Second-order one-sided derivative from three values spaced h apart,
// oriented so `f0` is the endpoint.
double one_sided(double f0, double f1, double f2, double h) { return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h); }

DiscreteField radial_grad(const DiscreteField& u, const RadialMesh& m) {
  DiscreteField out(u.mesh_ptr());
  const double h = m.h();
  for (int i = 1; i < m.M; ++i) out[i] = (u[i + 1] - u[i]) * (u[i] - u[i - 1]) / (h * h);
  out[0] = 0.0;
  if (m.kind == RadialKind::annulus) {
    const double d = one_sided(u[0], u[1], u[2], h);
    out[0] = d * d;
  }
  const int M = m.M;
  const double d = one_sided(u[M], u[M - 1], u[M - 2], h);
  out[M] = d * d;
  return out;
}

double sq(double x) { return x * x; }

DiscreteField grid_grad(const DiscreteField& u, const Grid2D& g) {
  DiscreteField out(u.mesh_ptr());
  const double hx = g.hx();
  const double hy = g.hy();
  const int s = g.nx + 2;
  for (int j = 0; j <= g.ny + 1; ++j) {
    for (int i = 0; i <= g.nx + 1; ++i) {
      const int c = g.node(i, j);
      double gx, gy;
      if (i == 0) gx = sq(one_sided(u[c], u[c + 1], u[c + 2], hx));
      else if (i == g.nx + 1) gx = sq(one_sided(u[c], u[c - 1], u[c - 2], hx));
      else gx = (u[c + 1] - u[c]) * (u[c] - u[c - 1]) / (hx * hx);
      if (j == 0) gy = sq(one_sided(u[c], u[c + s], u[c + 2 * s], hy));
      else if (j == g.ny + 1) gy = sq(one_sided(u[c], u[c - s], u[c - 2 * s], hy));
      else gy = (u[c + s] - u[c]) * (u[c] - u[c - s]) / (hy * hy);
      out[c] = gx + gy;
    }
  }
  return out;
}

}  // namespace

DiscreteField laplacian(const DiscreteField& u) {
  return std::visit(overloaded{[&](const RadialMesh& m) { return radial_lap(u, m); },
                               [&](const Grid2D& g) { return grid_lap(u, g); }},
                    u.mesh());
}

DiscreteField radial_laplacian(const DiscreteField& u, const RadialMesh& mesh) {
  const auto* m = std::get_if<RadialMesh>(&u.mesh());
  if (!m || !(*m == mesh)) throw Error(ErrorKind::mesh_mismatch, "field is not on the given radial mesh");
  return radial_lap(u, mesh);
}

DiscreteField gradient_sq(const DiscreteField& u) {
  return std::visit(overloaded{[&](const RadialMesh& m) { return radial_grad(u, m); },
                               [&](const Grid2D& g) { return grid_grad(u, g); }},
                    u.mesh());
}

DiscreteField gradient_sq(const DiscreteField& u, const Mesh& mesh) {
  if (!(u.mesh() == mesh)) throw Error(ErrorKind::mesh_mismatch, "field is not on the given mesh");
  return gradient_sq(u);
}

void write_field(std::ostream& os, const DiscreteField& u) {
  if (const auto* m = std::get_if<RadialMesh>(&u.mesh())) {
    for (int i = 0; i <= m->M; ++i) {
      put(os, m->r(i));
      os << ' ';
      put(os, u[i]);
      os << '\n';
    }
    return;
  }
  os << "x,y,u\n";
  for (std::size_t c = 0; c < u.size(); ++c) {
    const Point p = node_point(u.mesh(), static_cast<int>(c));
    put(os, p.x);
    os << ',';
    put(os, p.y);
    os << ',';
    put(os, u[c]);
    os << '\n';
  }
}

}  // namespace qgrad
