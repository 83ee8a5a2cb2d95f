#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qgrad/mesh.hpp"

namespace qgrad {

/// Tridiagonal matrix; lower[0] and upper[n-1] are unused.
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  explicit Tridiagonal(std::size_t n = 0) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
  std::size_t size() const noexcept { return diag.size(); }
  std::vector<double> apply(const std::vector<double>& x) const;
};

/// General band matrix with kl sub- and ku super-diagonals. Row i stores
/// columns i-kl .. i+ku contiguously (row-major band storage).
struct BandedSystem {
  int n = 0;
  int kl = 1;
  int ku = 1;
  std::vector<double> band;
  std::vector<double> rhs;

  BandedSystem(int n, int kl, int ku);
  double& at(int i, int j);
  double at(int i, int j) const;
  bool in_band(int i, int j) const noexcept { return j - i <= ku && i - j <= kl && j >= 0 && j < n; }
};

/// LU factors of a band matrix with partial (row) pivoting; the upper band
/// widens to ku + kl. Throws ErrorKind::singular_system when a pivot falls
/// below 1e-14 times the largest matrix entry.
class BandedLU {
 public:
  explicit BandedLU(const BandedSystem& a);
  std::vector<double> solve(std::vector<double> b) const;
  int size() const noexcept { return n_; }

 private:
  double& w(int i, int j) { return work_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)]; }
  double w(int i, int j) const { return work_[static_cast<std::size_t>(i) * width_ + (j - i + kl_)]; }

  int n_, kl_, ku_, width_;
  std::vector<double> work_;
  std::vector<int> pivot_;
};

/// Solves the system's own right-hand side.
std::vector<double> banded_solve(const BandedSystem& system);

struct TridiagReport {
  bool used_fallback = false;
};

/// Thomas algorithm; falls back to banded_solve when a pivot drops below
/// 1e-14 times the row scale.
std::vector<double> tridiag_solve(const Tridiagonal& a, const std::vector<double>& rhs,
                                  TridiagReport* report = nullptr);

/// Compressed sparse row matrix.
struct SparseMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  struct Triplet {
    int i, j;
    double v;
  };
  /// Duplicate entries are summed; columns sorted per row.
  static SparseMatrix from_triplets(int n, std::vector<Triplet> entries);

  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> diagonal() const;
  double at(int i, int j) const;
  /// Band copy for direct solves; kl = ku = max |i - j|.
  BandedSystem to_banded() const;
};

using LinearOperator = std::function<void(const std::vector<double>& x, std::vector<double>& y)>;

struct KrylovReport {
  int iterations = 0;
  int restarts = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned BiCGSTAB. Stops at relative residual <= tol; on
/// breakdown restarts once from the current iterate, then throws
/// ErrorKind::breakdown. Throws ErrorKind::max_iterations on exhaustion.
std::vector<double> krylov_solve(const LinearOperator& op, const std::vector<double>& diag,
                                 const std::vector<double>& rhs, double tol, int max_iterations = 2000,
                                 KrylovReport* report = nullptr);
std::vector<double> krylov_solve(const SparseMatrix& a, const std::vector<double>& rhs, double tol,
                                 int max_iterations = 2000, KrylovReport* report = nullptr);

/// -Delta_h restricted to unknowns. Tridiagonal for radial meshes.
Tridiagonal radial_negative_laplacian(const RadialMesh& mesh);
SparseMatrix grid_negative_laplacian(const Grid2D& grid);

struct EigenPair {
  double lambda1 = 0.0;
  DiscreteField phi1;  // max norm 1, positive at unknowns
  int iterations = 0;
  double residual = 0.0;  // ||-Delta_h phi1 - lambda1 phi1||_inf
};

/// Principal Dirichlet eigenpair of -Delta_h by inverse power iteration.
EigenPair principal_eigenpair(MeshPtr mesh);

/// Richardson extrapolation of second-order eigenvalues on M and 2M.
double richardson_eigenvalue(double coarse, double fine);

}  // namespace qgrad
