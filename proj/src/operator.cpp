#include "latgl/operator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "latgl/errors.hpp"

namespace latgl {

Field::Field(GridSpec g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw DomainError("field size does not match grid");
}

Field apply_hamiltonian(const Potential& pot, const Field& psi) {
  const GridSpec& g = pot.grid();
  if (!(psi.grid == g)) throw DomainError("apply_hamiltonian: field grid does not match potential");
  Field out(g);
  for (int n = 0; n <= g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) {
      out(n, m) = pot.a_or_zero(n, m) * psi.at_or_zero(n - 1, m) +
                  pot.a_or_zero(n + 1, m) * psi.at_or_zero(n + 1, m) +
                  pot.b_or_zero(n, m) * psi.at_or_zero(n, m - 1) +
                  pot.b_or_zero(n, m + 1) * psi.at_or_zero(n, m + 1) + pot.c(n, m) * psi(n, m);
    }
  return out;
}

Matrix assemble_dense(const Potential& pot) {
  const GridSpec& g = pot.grid();
  Matrix h(g.size(), g.size());
  for (int n = 0; n <= g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) {
      const auto i = g.index(n, m);
      h(i, i) = pot.c(n, m);
      if (n > 0) {
        const auto j = g.index(n - 1, m);
        h(i, j) = h(j, i) = pot.a(n, m);
      }
      if (m > g.m_min) {
        const auto j = g.index(n, m - 1);
        h(i, j) = h(j, i) = pot.b(n, m);
      }
    }
  return h;
}

BlockPair block_matrices(const Potential& pot, int n) {
  const GridSpec& g = pot.grid();
  if (n < 0 || n > g.n_max) throw DomainError("block_matrices: n out of range");
  const auto w = static_cast<std::size_t>(g.width());
  BlockPair out{std::nullopt, Matrix(w, w)};
  for (int m = g.m_min; m <= g.m_max; ++m) {
    const auto k = static_cast<std::size_t>(m - g.m_min);
    out.onsite(k, k) = pot.c(n, m);
    if (m > g.m_min) out.onsite(k, k - 1) = out.onsite(k - 1, k) = pot.b(n, m);
  }
  if (n >= 1) {
    Matrix a(w, w);
    for (int m = g.m_min; m <= g.m_max; ++m) {
      const auto k = static_cast<std::size_t>(m - g.m_min);
      a(k, k) = pot.a(n, m);
    }
    out.hop = std::move(a);
  }
  return out;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

SymmetricEigen eigendecompose(const Matrix& input, double tol) {
  if (input.rows() != input.cols()) throw DomainError("eigendecompose: matrix not square");
  if (!(tol > 0.0)) throw DomainError("eigendecompose: tol must be > 0");
  const std::size_t n = input.rows();
  Matrix a = input;
  Matrix v = Matrix::identity(n);
  const double target = 1e-13 * norm_frobenius(input);
  constexpr int kMaxSweeps = 100;

  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= target) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation annihilating a(p,q), Golub & Van Loan 8.4.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }
  if (sweep == kMaxSweeps && off_diagonal_norm(a) > target) {
    std::ostringstream os;
    os << "eigendecompose: no convergence after " << kMaxSweeps << " sweeps, off-norm " << off_diagonal_norm(a)
       << " > " << target;
    throw NumericError(os.str());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  SymmetricEigen out{std::vector<double>(n), Matrix(n, n), sweep};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (v(i, src) != 0.0) {
        sign = v(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }

  const double scale = std::max(norm_inf(input), 1e-300);
  for (std::size_t k = 0; k < n; ++k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = -out.values[k] * out.vectors(i, k);
      for (std::size_t j = 0; j < n; ++j) r += input(i, j) * out.vectors(j, k);
      worst = std::max(worst, std::abs(r));
    }
    if (worst > tol * scale) {
      std::ostringstream os;
      os << "eigendecompose: residual " << worst << " for eigenvalue #" << k << " exceeds " << tol * scale;
      throw NumericError(os.str());
    }
  }
  return out;
}

}  // namespace latgl
