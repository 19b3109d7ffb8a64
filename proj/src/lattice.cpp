#include "latgl/lattice.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <sstream>

#include "latgl/errors.hpp"

namespace latgl {

void GridSpec::validate() const {
  if (n_max < 0) throw ValidationError("grid: n_max must be >= 0");
  if (m_max < m_min) throw ValidationError("grid: m_max must be >= m_min");
}

ConeDomain cone_sites(const GridSpec& grid, int n, int m) {
  if (!grid.contains(n, m)) {
    std::ostringstream os;
    os << "cone apex (" << n << "," << m << ") outside grid";
    throw DomainError(os.str());
  }
  ConeDomain cone{{n, m}, {}};
  for (int np = 0; np <= n; ++np) {
    const int half = n - np;
    for (int mp = std::max(grid.m_min, m - half); mp <= std::min(grid.m_max, m + half); ++mp)
      cone.sites.push_back({np, mp});
  }
  return cone;
}

std::vector<std::size_t> cone_below(const GridSpec& grid, int n, int m) {
  std::vector<std::size_t> out;
  for (int np = 0; np < n; ++np) {
    const int half = n - np;
    for (int mp = std::max(grid.m_min, m - half); mp <= std::min(grid.m_max, m + half); ++mp)
      out.push_back(grid.index(np, mp));
  }
  return out;
}

Potential::Potential(GridSpec grid)
    : grid_(grid),
      a_(static_cast<std::size_t>(grid.rows()), static_cast<std::size_t>(grid.width())),
      b_(static_cast<std::size_t>(grid.rows()), static_cast<std::size_t>(grid.width())),
      c_(static_cast<std::size_t>(grid.rows()), static_cast<std::size_t>(grid.width())) {
  grid.validate();
}

void Potential::set_a(int n, int m, double v) {
  if (!has_a(n, m)) throw DomainError("a(n,m) is only stored for n >= 1");
  a_(n, col(m)) = v;
}

void Potential::set_b(int n, int m, double v) {
  if (!has_b(n, m)) throw DomainError("b(n,m) is only stored for m > m_min");
  b_(n, col(m)) = v;
}

void Potential::validate() const {
  grid_.validate();
  for (int n = 0; n <= grid_.n_max; ++n)
    for (int m = grid_.m_min; m <= grid_.m_max; ++m) {
      std::ostringstream os;
      if (!std::isfinite(c(n, m))) {
        os << "c(" << n << "," << m << ") is not finite";
        throw ValidationError(os.str());
      }
      if (has_b(n, m) && !std::isfinite(b(n, m))) {
        os << "b(" << n << "," << m << ") is not finite";
        throw ValidationError(os.str());
      }
      if (has_a(n, m) && !(std::isfinite(a(n, m)) && a(n, m) > 0.0)) {
        os << "a(" << n << "," << m << ") = " << a(n, m) << " must be finite and > 0";
        throw ValidationError(os.str());
      }
    }
}

std::uint64_t Potential::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(grid_.n_max));
  mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(grid_.m_min)));
  mix(static_cast<std::uint64_t>(static_cast<std::int64_t>(grid_.m_max)));
  for (const Matrix* arr : {&a_, &b_, &c_})
    for (double v : arr->data()) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

namespace {

// 53-bit uniform in [0,1) from the raw engine output; avoids the
// implementation-defined std::uniform_real_distribution.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Potential make_potential(const PotentialPreset& p, const GridSpec& grid) {
  grid.validate();
  Potential pot(grid);
  auto fill = [&](auto&& fa, auto&& fb, auto&& fc) {
    for (int n = 0; n <= grid.n_max; ++n)
      for (int m = grid.m_min; m <= grid.m_max; ++m) {
        if (pot.has_a(n, m)) pot.set_a(n, m, fa());
        if (pot.has_b(n, m)) pot.set_b(n, m, fb());
        pot.set_c(n, m, fc());
      }
  };
  if (std::holds_alternative<preset::Free>(p)) {
    fill([] { return 1.0; }, [] { return 1.0; }, [] { return 0.0; });
  } else if (auto* k = std::get_if<preset::Constant>(&p)) {
    const double c0 = k->c0;
    fill([] { return 1.0; }, [] { return 1.0; }, [c0] { return c0; });
  } else {
    const auto& r = std::get<preset::SeededRandom>(p);
    const auto& rg = r.ranges;
    if (!(rg.a_lo > 0.0 && rg.a_hi >= rg.a_lo)) throw ValidationError("seeded_random: a range must be strictly positive");
    if (rg.b_hi < rg.b_lo || rg.c_hi < rg.c_lo) throw ValidationError("seeded_random: inverted range");
    std::mt19937_64 rng(r.seed);
    fill([&] { return rg.a_lo + (rg.a_hi - rg.a_lo) * unit(rng); },
         [&] { return rg.b_lo + (rg.b_hi - rg.b_lo) * unit(rng); },
         [&] { return rg.c_lo + (rg.c_hi - rg.c_lo) * unit(rng); });
  }
  pot.validate();
  return pot;
}

}  // namespace latgl
