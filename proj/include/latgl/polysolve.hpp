#pragma once

#include <cstdint>
#include <vector>

#include "latgl/lattice.hpp"
#include "latgl/matrix.hpp"
#include "latgl/polynomial.hpp"

namespace latgl {

/// Relative cut below which propagated coefficients become exact zeros.
inline constexpr double kCoeffTruncation = 1e-13;

/// Polynomial solutions phi_{ms}(lambda, n) for every site (n,m) and every
/// boundary channel s. Entry (0,m,s) is delta_{ms}; entries with |s-m| > n
/// are the zero polynomial.
class PolyTable {
 public:
  PolyTable() = default;
  PolyTable(GridSpec grid, std::uint64_t provenance);

  const GridSpec& grid() const noexcept { return grid_; }
  /// Fingerprint of the potential the table was built from.
  std::uint64_t provenance() const noexcept { return provenance_; }
  void set_provenance(std::uint64_t tag) noexcept { provenance_ = tag; }

  const Polynomial& at(int n, int m, int s) const { return entries_[slot(grid_.index(n, m), s)]; }
  Polynomial& at(int n, int m, int s) { return entries_[slot(grid_.index(n, m), s)]; }
  const Polynomial& at(std::size_t site, int s) const { return entries_[slot(site, s)]; }
  Polynomial& at(std::size_t site, int s) { return entries_[slot(site, s)]; }

  bool operator==(const PolyTable&) const = default;

 private:
  std::size_t slot(std::size_t site, int s) const noexcept {
    return site * static_cast<std::size_t>(grid_.width()) + static_cast<std::size_t>(s - grid_.m_min);
  }

  GridSpec grid_;
  std::uint64_t provenance_ = 0;
  std::vector<Polynomial> entries_;
};

/// Runs the recursion of H phi = lambda phi upward in n from phi(-1) = 0,
/// phi(0) = delta, in exact coefficient arithmetic (floating point).
/// Channels s are independent and run in parallel under Exec::parallel.
PolyTable propagate_polynomials(const Potential& pot, Exec exec = Exec::parallel);

/// Degree of phi_{ms}(n) on the grid (row n, column m - m_min), -1 for zero.
std::vector<std::vector<int>> degree_map(const PolyTable& table, int s);

/// Phi(lambda): rows are sites, columns are channels s.
Matrix eval_polytable(const PolyTable& table, double lambda, Exec exec = Exec::parallel);

}  // namespace latgl
