#pragma once

#include <optional>
#include <vector>

#include "latgl/lattice.hpp"
#include "latgl/matrix.hpp"

namespace latgl {

/// Real field psi(n,m) over all sites, stored in site order.
struct Field {
  GridSpec grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(GridSpec g) : grid(g), values(g.size(), 0.0) {}
  Field(GridSpec g, std::vector<double> v);

  double operator()(int n, int m) const { return values[grid.index(n, m)]; }
  double& operator()(int n, int m) { return values[grid.index(n, m)]; }
  /// Zero outside the grid.
  double at_or_zero(int n, int m) const noexcept { return grid.contains(n, m) ? values[grid.index(n, m)] : 0.0; }
};

/// (H psi)(n,m) with every out-of-grid reference taken as zero.
Field apply_hamiltonian(const Potential& pot, const Field& psi);

/// Dense symmetric matrix of H in site order; each off-diagonal entry is
/// written once and mirrored.
Matrix assemble_dense(const Potential& pot);

/// A_n (diagonal of a(n,.), absent for n = 0) and V_n (tridiagonal: c on the
/// diagonal, b on the off-diagonals).
struct BlockPair {
  std::optional<Matrix> hop;
  Matrix onsite;
};

BlockPair block_matrices(const Potential& pot, int n);

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k is the eigenvector of values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Sweeps until off(M) <= 1e-13 ||M||_F. Eigenvalues come out ascending; the
/// first nonzero component of every eigenvector is positive. Degenerate
/// eigenvalues keep separate vectors. Throws NumericError if the sweep cap is
/// hit or a residual exceeds tol * ||M||_inf.
SymmetricEigen eigendecompose(const Matrix& m, double tol);

}  // namespace latgl
