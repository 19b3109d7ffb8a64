#include "latgl/darboux.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latgl/errors.hpp"

namespace latgl {

namespace {

std::string site_str(int n, int m) {
  std::ostringstream os;
  os << "(" << n << "," << m << ")";
  return os.str();
}

// Row n_max of b and c is outside the window of every route.
void flag_last_row(Reconstruction& rec) {
  const GridSpec& g = rec.pot.grid();
  const int n = g.n_max;
  for (int m = g.m_min; m <= g.m_max; ++m) {
    if (rec.pot.has_b(n, m)) rec.flagged.push_back({'b', n, m, kFlagCopied});
    rec.flagged.push_back({'c', n, m, kFlagCopied});
  }
}

double max_abs_field(const std::vector<Field>& fs) {
  double s = 0.0;
  for (const auto& f : fs)
    for (double v : f.values) s = std::max(s, std::abs(v));
  return s;
}

// Per-site sums S(j;k) with guarded division.
class PairSums {
 public:
  PairSums(const std::vector<Field>& psi0, const std::vector<Field>& psi) : psi0_(psi0), psi_(psi) {
    if (psi0.size() != psi.size()) throw DomainError("bargmann_potentials: psi0 and psi lists differ in length");
    if (psi0.empty()) throw DomainError("bargmann_potentials: no states");
    for (std::size_t i = 0; i < psi0.size(); ++i)
      if (!(psi0[i].grid == psi0.front().grid) || !(psi[i].grid == psi0.front().grid))
        throw DomainError("bargmann_potentials: fields on different grids");
    floor_ = 1e-12 * max_abs_field(psi0) * max_abs_field(psi);
  }

  // sum_mu psi_mu(n,m) psi0_mu(n',m'); zero when (n',m') is off the grid.
  double operator()(int n, int m, int np, int mp) const {
    double acc = 0.0;
    for (std::size_t t = 0; t < psi_.size(); ++t) acc += psi_[t](n, m) * psi0_[t].at_or_zero(np, mp);
    return acc;
  }

  double denominator(int n, int m) const {
    const double d = (*this)(n, m, n, m);
    if (!(std::abs(d) >= floor_) || d == 0.0) {
      std::ostringstream os;
      os << "closed-form denominator sum psi psi0 vanishes at site " << site_str(n, m) << " (" << d << ")";
      throw SingularTransformError(os.str());
    }
    return d;
  }

 private:
  const std::vector<Field>& psi0_;
  const std::vector<Field>& psi_;
  double floor_ = 0.0;
};

void require_nonzero(const Field& f, int n, int m, const char* name, double floor) {
  if (!(std::abs(f(n, m)) > floor)) {
    std::ostringstream os;
    os << name << " vanishes at site " << site_str(n, m);
    throw SingularTransformError(os.str());
  }
}

double field_scale(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace

Reconstruction reconstruct_potentials_from_K(const TransformKernel& k, const Potential& ref_pot) {
  const GridSpec& g = ref_pot.grid();
  if (!(k.grid == g)) throw DomainError("reconstruct_potentials_from_K: kernel and potential grids differ");
  for (std::size_t j = 0; j < g.size(); ++j)
    if (!(k.values(j, j) > 0.0)) {
      const Site s = g.site(j);
      throw NumericError("reconstruction needs a positive K diagonal; K" + site_str(s.n, s.m) + " = " +
                         std::to_string(k.values(j, j)));
    }
  Reconstruction rec{ref_pot, {}};
  Potential& p = rec.pot;
  for (int n = 0; n < g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) p.set_a(n + 1, m, ref_pot.a(n + 1, m) * k.diag(n, m) / k.diag(n + 1, m));
  for (int n = 0; n < g.n_max; ++n) {
    for (int m = g.m_min; m <= g.m_max; ++m) {
      double c = ref_pot.c(n, m) - ref_pot.a(n + 1, m) * k({n + 1, m}, {n, m}) / k.diag(n + 1, m);
      if (n > 0) c += ref_pot.a(n, m) * k({n, m}, {n - 1, m}) / k.diag(n, m);
      p.set_c(n, m, c);
    }
    for (int m = g.m_min; m < g.m_max; ++m) {
      double num = ref_pot.b(n, m + 1) * k.diag(n, m) - p.a(n + 1, m) * k({n + 1, m}, {n, m + 1});
      if (n > 0) num += ref_pot.a(n, m + 1) * k({n, m}, {n - 1, m + 1});
      p.set_b(n, m + 1, num / k.diag(n, m + 1));
    }
  }
  flag_last_row(rec);
  return rec;
}

bool complete_boundary_row(Reconstruction& rec, const PolyTable& new_table, const SpectralData& new_measure) {
  const GridSpec& g = rec.pot.grid();
  if (!(new_table.grid() == g) || !(new_measure.grid == g))
    throw DomainError("complete_boundary_row: grids differ");
  if (new_measure.size() != g.size()) return false;
  const int n = g.n_max;
  const auto w = static_cast<std::size_t>(g.width());
  std::vector<double> cc(w, 0.0), bb(w, 0.0);
  for (std::size_t nu = 0; nu < new_measure.size(); ++nu) {
    const double lam = new_measure.eigenvalues[nu];
    const auto psi = synthesize_state(new_table, new_measure.gamma(nu), lam);
    for (std::size_t i = 0; i < w; ++i) {
      const int m = g.m_min + static_cast<int>(i);
      cc[i] += lam * psi(n, m) * psi(n, m);
      if (i + 1 < w) bb[i + 1] += lam * psi(n, m) * psi(n, m + 1);
    }
  }
  for (std::size_t i = 0; i < w; ++i) {
    const int m = g.m_min + static_cast<int>(i);
    rec.pot.set_c(n, m, cc[i]);
    if (i > 0) rec.pot.set_b(n, m, bb[i]);
  }
  for (auto& f : rec.flagged)
    if (f.n == n && (f.field == 'b' || f.field == 'c')) f.reason = kFlagMeasure;
  return true;
}

Reconstruction bargmann_potentials(const Potential& ref_pot, const std::vector<Field>& psi0,
                                   const std::vector<Field>& psi) {
  const GridSpec& g = ref_pot.grid();
  PairSums s(psi0, psi);
  if (!(psi0.front().grid == g)) throw DomainError("bargmann_potentials: fields and potential grids differ");
  Reconstruction rec{ref_pot, {}};
  Potential& p = rec.pot;
  for (int n = 0; n < g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m)
      p.set_a(n + 1, m, ref_pot.a(n + 1, m) * s(n, m, n, m) / s.denominator(n + 1, m));
  for (int n = 0; n < g.n_max; ++n) {
    for (int m = g.m_min; m <= g.m_max; ++m) {
      double c = ref_pot.c(n, m) - ref_pot.a(n + 1, m) * s(n + 1, m, n, m) / s.denominator(n + 1, m);
      if (n > 0) c += ref_pot.a(n, m) * s(n, m, n - 1, m) / s.denominator(n, m);
      p.set_c(n, m, c);
    }
    for (int m = g.m_min; m < g.m_max; ++m) {
      const double den = s.denominator(n, m + 1);
      double b = ref_pot.b(n, m + 1) * s(n, m, n, m) / den - p.a(n + 1, m) * s(n + 1, m, n, m + 1) / den;
      if (n > 0) b += ref_pot.a(n, m + 1) * s(n, m, n - 1, m + 1) / den;
      p.set_b(n, m + 1, b);
    }
  }
  flag_last_row(rec);
  return rec;
}

Reconstruction darboux_single(const Potential& ref_pot, const Field& psi0, const Field& psi) {
  const GridSpec& g = ref_pot.grid();
  if (!(psi0.grid == g) || !(psi.grid == g)) throw DomainError("darboux_single: fields and potential grids differ");
  const double f0 = 1e-12 * field_scale(psi0);
  const double f1 = 1e-12 * field_scale(psi);
  Reconstruction rec{ref_pot, {}};
  Potential& p = rec.pot;
  for (int n = 0; n < g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) {
      require_nonzero(psi0, n + 1, m, "psi0", f0);
      require_nonzero(psi, n + 1, m, "psi", f1);
      p.set_a(n + 1, m, ref_pot.a(n + 1, m) * psi(n, m) * psi0(n, m) / (psi(n + 1, m) * psi0(n + 1, m)));
    }
  for (int n = 0; n < g.n_max; ++n) {
    for (int m = g.m_min; m <= g.m_max; ++m) {
      require_nonzero(psi0, n, m, "psi0", f0);
      double c = ref_pot.c(n, m) - ref_pot.a(n + 1, m) * psi0(n, m) / psi0(n + 1, m);
      if (n > 0) c += ref_pot.a(n, m) * psi0(n - 1, m) / psi0(n, m);
      p.set_c(n, m, c);
    }
    for (int m = g.m_min; m < g.m_max; ++m) {
      require_nonzero(psi, n, m + 1, "psi", f1);
      double inner = ref_pot.b(n, m + 1) * psi0(n, m) / psi0(n, m + 1) -
                     ref_pot.a(n + 1, m) * psi0(n, m) / psi0(n + 1, m);
      if (n > 0) inner += ref_pot.a(n, m + 1) * psi0(n - 1, m + 1) / psi0(n, m + 1);
      p.set_b(n, m + 1, psi(n, m) / psi(n, m + 1) * inner);
    }
  }
  flag_last_row(rec);
  return rec;
}

PolyTable darboux_solution_transform(const Field& psi0, const Field& psi, const PolyTable& ref_table, Exec exec) {
  const GridSpec& g = ref_table.grid();
  if (!(psi0.grid == g) || !(psi.grid == g))
    throw DomainError("darboux_solution_transform: fields and table grids differ");
  PolyTable out(g, 0);
  const auto np = static_cast<long>(g.size());
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long jl = 0; jl < np; ++jl) {
    const Site sj = g.site(static_cast<std::size_t>(jl));
    const auto cone = cone_sites(g, sj.n, sj.m);
    const double lead = -psi(sj.n, sj.m);
    for (int s = g.m_min; s <= g.m_max; ++s) {
      Polynomial acc;
      if (lead != 0.0)
        for (const Site& k : cone.sites) {
          const double w = lead * psi0(k.n, k.m);
          if (w != 0.0) acc.add_scaled(ref_table.at(k.n, k.m, s), w);
        }
      acc.truncate(kCoeffTruncation);
      out.at(static_cast<std::size_t>(jl), s) = std::move(acc);
    }
  }
  return out;
}

Field darboux_gauge_from_kernel(const TransformKernel& k, const Field& psi0) {
  const GridSpec& g = psi0.grid;
  if (!(k.grid == g)) throw DomainError("darboux_gauge_from_kernel: grids differ");
  const double f0 = 1e-12 * field_scale(psi0);
  Field psi(g);
  for (int n = 0; n <= g.n_max; ++n)
    for (int m = g.m_min; m <= g.m_max; ++m) {
      require_nonzero(psi0, n, m, "psi0", f0);
      psi(n, m) = -k.diag(n, m) / psi0(n, m);
    }
  return psi;
}

}  // namespace latgl
