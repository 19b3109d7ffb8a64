#include "latgl/polysolve.hpp"

#include "latgl/errors.hpp"

namespace latgl {

PolyTable::PolyTable(GridSpec grid, std::uint64_t provenance)
    : grid_(grid), provenance_(provenance), entries_(grid.size() * static_cast<std::size_t>(grid.width())) {}

namespace {

void propagate_channel(const Potential& pot, PolyTable& t, int s) {
  const GridSpec& g = pot.grid();
  t.at(0, s, s).coeffs = {1.0};
  for (int n = 0; n < g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) {
      Polynomial next;
      next.add_shifted_scaled(t.at(n, m, s), 1.0);
      next.add_scaled(t.at(n, m, s), -pot.c(n, m));
      if (n > 0) next.add_scaled(t.at(n - 1, m, s), -pot.a(n, m));
      if (m > g.m_min) next.add_scaled(t.at(n, m - 1, s), -pot.b(n, m));
      if (m < g.m_max) next.add_scaled(t.at(n, m + 1, s), -pot.b(n, m + 1));
      next.scale(1.0 / pot.a(n + 1, m));
      next.truncate(kCoeffTruncation);
      t.at(n + 1, m, s) = std::move(next);
    }
}

}  // namespace

PolyTable propagate_polynomials(const Potential& pot, Exec exec) {
  pot.validate();
  const GridSpec& g = pot.grid();
  PolyTable table(g, pot.fingerprint());
  const int w = g.width();
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (int k = 0; k < w; ++k) propagate_channel(pot, table, g.m_min + k);
  return table;
}

std::vector<std::vector<int>> degree_map(const PolyTable& table, int s) {
  const GridSpec& g = table.grid();
  if (s < g.m_min || s > g.m_max) throw DomainError("degree_map: s outside the m range");
  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.rows()), std::vector<int>(static_cast<std::size_t>(g.width())));
  for (int n = 0; n <= g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) out[n][m - g.m_min] = table.at(n, m, s).degree();
  return out;
}

Matrix eval_polytable(const PolyTable& table, double lambda, Exec exec) {
  const GridSpec& g = table.grid();
  const auto p = g.size();
  const int w = g.width();
  Matrix phi(p, static_cast<std::size_t>(w));
  const auto np = static_cast<long>(p);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long j = 0; j < np; ++j)
    for (int k = 0; k < w; ++k) phi(j, k) = table.at(static_cast<std::size_t>(j), g.m_min + k)(lambda);
  return phi;
}

}  // namespace latgl
