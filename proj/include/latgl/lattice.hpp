#pragma once

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "latgl/matrix.hpp"

namespace latgl {

/// Execution switch for the data-parallel kernels. `serial` is the reference
/// path kept for testing; both produce bit-identical results.
enum class Exec { serial, parallel };

struct Site {
  int n = 0;
  int m = 0;
  bool operator==(const Site&) const = default;
};

/// Finite lattice: n in [0, n_max], m in [m_min, m_max]. Sites are indexed
/// n-major, m-minor.
struct GridSpec {
  int n_max = 0;
  int m_min = 0;
  int m_max = 0;

  /// Throws ValidationError on an empty or inverted range.
  void validate() const;

  int rows() const noexcept { return n_max + 1; }
  int width() const noexcept { return m_max - m_min + 1; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(rows()) * width(); }

  bool contains(int n, int m) const noexcept { return n >= 0 && n <= n_max && m >= m_min && m <= m_max; }
  std::size_t index(int n, int m) const noexcept {
    return static_cast<std::size_t>(n) * width() + static_cast<std::size_t>(m - m_min);
  }
  std::size_t index(Site s) const noexcept { return index(s.n, s.m); }
  Site site(std::size_t idx) const noexcept {
    return {static_cast<int>(idx / width()), m_min + static_cast<int>(idx % width())};
  }

  bool operator==(const GridSpec&) const = default;
};

/// Sites (n', m') with n' <= n and |m' - m| <= n - n', clipped to the grid,
/// ordered by n' then m'. The apex is the last element.
struct ConeDomain {
  Site apex;
  std::vector<Site> sites;
};

ConeDomain cone_sites(const GridSpec& grid, int n, int m);

/// Site indices of the cone strictly below the apex row (n' < n).
std::vector<std::size_t> cone_below(const GridSpec& grid, int n, int m);

inline bool in_cone(Site apex, Site s) noexcept {
  const int dm = s.m > apex.m ? s.m - apex.m : apex.m - s.m;
  return s.n <= apex.n && dm <= apex.n - s.n;
}

/// Discrete potential: hopping a along n, hopping b along m, on-site c.
///
/// a(n,m) is stored for n in 1..n_max and couples (n-1,m) with (n,m);
/// b(n,m) is stored for m in m_min+1..m_max and couples (n,m-1) with (n,m).
/// Couplings that would leave the grid are absent.
class Potential {
 public:
  Potential() = default;
  explicit Potential(GridSpec grid);

  const GridSpec& grid() const noexcept { return grid_; }

  double a(int n, int m) const { return a_(n, col(m)); }
  double b(int n, int m) const { return b_(n, col(m)); }
  double c(int n, int m) const { return c_(n, col(m)); }
  void set_a(int n, int m, double v);
  void set_b(int n, int m, double v);
  void set_c(int n, int m, double v) { c_(n, col(m)) = v; }

  bool has_a(int n, int m) const noexcept { return n >= 1 && n <= grid_.n_max && m >= grid_.m_min && m <= grid_.m_max; }
  bool has_b(int n, int m) const noexcept { return n >= 0 && n <= grid_.n_max && m > grid_.m_min && m <= grid_.m_max; }

  /// Coupling value, zero when the bond leaves the grid.
  double a_or_zero(int n, int m) const noexcept { return has_a(n, m) ? a_(n, col(m)) : 0.0; }
  double b_or_zero(int n, int m) const noexcept { return has_b(n, m) ? b_(n, col(m)) : 0.0; }

  /// Throws ValidationError unless all entries are finite and every a > 0.
  void validate() const;

  /// 64-bit FNV-1a over the grid and all stored coefficients; used as the
  /// provenance tag of derived tables.
  std::uint64_t fingerprint() const;

  bool operator==(const Potential&) const = default;

 private:
  std::size_t col(int m) const noexcept { return static_cast<std::size_t>(m - grid_.m_min); }

  GridSpec grid_;
  Matrix a_;
  Matrix b_;
  Matrix c_;
};

namespace preset {
struct Free {};
struct Constant {
  double c0 = 0.0;
};
struct Ranges {
  double a_lo = 0.5, a_hi = 1.5;
  double b_lo = -1.0, b_hi = 1.0;
  double c_lo = -1.0, c_hi = 1.0;
};
struct SeededRandom {
  std::uint64_t seed = 0;
  Ranges ranges{};
};
}  // namespace preset

using PotentialPreset = std::variant<preset::Free, preset::Constant, preset::SeededRandom>;

/// free: a = b = 1, c = 0. constant: as free with c = c0. seeded_random:
/// uniform draws from `ranges`, reproducible from the seed on any platform.
Potential make_potential(const PotentialPreset& preset, const GridSpec& grid);

}  // namespace latgl
