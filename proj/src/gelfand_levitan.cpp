#include "latgl/gelfand_levitan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "latgl/errors.hpp"

namespace latgl {

namespace {

std::string site_str(Site s) {
  std::ostringstream os;
  os << "(" << s.n << "," << s.m << ")";
  return os.str();
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

// Reweights of the same atom summed, ordered by atom index.
std::map<std::size_t, Matrix> summed_reweights(const SpectralModification& mod) {
  std::map<std::size_t, Matrix> out;
  for (const auto& r : mod.reweights) {
    auto [it, fresh] = out.try_emplace(r.nu, r.delta_c);
    if (!fresh)
      for (std::size_t i = 0; i < r.delta_c.rows(); ++i)
        for (std::size_t j = 0; j < r.delta_c.cols(); ++j) it->second(i, j) += r.delta_c(i, j);
  }
  return out;
}

Matrix outer(std::span<const double> g) {
  Matrix c(g.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) c(i, j) = g[i] * g[j];
  return c;
}

Matrix plus(const Matrix& x, const Matrix& y) {
  Matrix z = x;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) z(i, j) += y(i, j);
  return z;
}

// Solves m x = rhs in place by unpivoted Cholesky. False if m is not
// positive definite.
bool cholesky_solve(Matrix m, std::vector<double>& x) {
  const std::size_t t = m.rows();
  for (std::size_t j = 0; j < t; ++j) {
    double d = m(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
    if (!(d > 0.0)) return false;
    m(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < t; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
      m(i, j) = s / m(j, j);
    }
  }
  for (std::size_t i = 0; i < t; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= m(i, k) * x[k];
    x[i] = s / m(i, i);
  }
  for (std::size_t i = t; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < t; ++k) s -= m(k, i) * x[k];
    x[i] = s / m(i, i);
  }
  return true;
}

// Gaussian elimination with partial pivoting. False on a pivot below
// 1e-14 * max(1, max|m|).
bool lu_solve(Matrix m, std::vector<double>& x) {
  const std::size_t t = m.rows();
  const double floor = 1e-14 * std::max(1.0, max_abs(m));
  for (std::size_t col = 0; col < t; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < t; ++i)
      if (std::abs(m(i, col)) > std::abs(m(piv, col))) piv = i;
    if (std::abs(m(piv, col)) <= floor) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < t; ++k) std::swap(m(piv, k), m(col, k));
      std::swap(x[piv], x[col]);
    }
    for (std::size_t i = col + 1; i < t; ++i) {
      const double f = m(i, col) / m(col, col);
      if (f == 0.0) continue;
      for (std::size_t k = col; k < t; ++k) m(i, k) -= f * m(col, k);
      x[i] -= f * x[col];
    }
  }
  for (std::size_t i = t; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < t; ++k) s -= m(i, k) * x[k];
    x[i] = s / m(i, i);
  }
  return true;
}

}  // namespace

std::vector<std::string> validate_modification(const SpectralData& ref, const SpectralModification& mod,
                                               bool allow_uncompensated) {
  const auto w = static_cast<std::size_t>(ref.grid.width());
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < mod.added.size(); ++i) {
    const auto& st = mod.added[i];
    if (!std::isfinite(st.lambda)) throw ValidationError("added state " + std::to_string(i) + ": lambda is not finite");
    if (st.gamma.size() != w)
      throw ValidationError("added state " + std::to_string(i) + ": gamma has " + std::to_string(st.gamma.size()) +
                            " entries, expected " + std::to_string(w));
    if (!std::all_of(st.gamma.begin(), st.gamma.end(), [](double v) { return std::isfinite(v); }))
      throw ValidationError("added state " + std::to_string(i) + ": gamma is not finite");
    if (norm2(st.gamma) == 0.0) throw ValidationError("added state " + std::to_string(i) + ": gamma is zero");
    for (std::size_t nu = 0; nu < ref.size(); ++nu) {
      const double l = ref.eigenvalues[nu];
      if (std::abs(st.lambda - l) <= 1e-9 * std::max(1.0, std::abs(l))) {
        std::ostringstream os;
        os << "added state " << i << ": lambda " << st.lambda << " collides with reference eigenvalue " << nu
           << " (" << l << ")";
        throw DomainError(os.str());
      }
    }
  }
  if (mod.reweights.empty()) return warnings;

  double scale = 0.0;
  for (std::size_t i = 0; i < mod.reweights.size(); ++i) {
    const auto& r = mod.reweights[i];
    if (r.nu >= ref.size())
      throw DomainError("reweight " + std::to_string(i) + ": atom index " + std::to_string(r.nu) + " out of range");
    if (r.delta_c.rows() != w || r.delta_c.cols() != w)
      throw ValidationError("reweight " + std::to_string(i) + ": delta_c must be " + std::to_string(w) + "x" +
                            std::to_string(w));
    const auto d = r.delta_c.data();
    if (!std::all_of(d.begin(), d.end(), [](double v) { return std::isfinite(v); }))
      throw ValidationError("reweight " + std::to_string(i) + ": delta_c is not finite");
    const double mag = max_abs(r.delta_c);
    if (max_abs_diff(r.delta_c, r.delta_c.transposed()) > 1e-12 * std::max(1.0, mag))
      throw ValidationError("reweight " + std::to_string(i) + ": delta_c is not symmetric");
    scale = std::max(scale, mag);
  }

  Matrix total(w, w);
  for (const auto& [nu, dc] : summed_reweights(mod)) {
    total = plus(total, dc);
    const Matrix c_new = plus(outer(ref.gamma(nu)), dc);
    const auto eig = eigendecompose(c_new, 1e-10);
    const double floor = -1e-12 * std::max(1.0, max_abs(c_new));
    if (eig.values.front() < floor) {
      std::ostringstream os;
      os << "reweight of atom " << nu << " makes C_nu indefinite (min eigenvalue " << eig.values.front() << ")";
      throw InadmissibleError(os.str());
    }
  }
  const double residual = max_abs(total);
  if (residual > 1e-10 * std::max(1.0, scale)) {
    std::ostringstream os;
    os << "reweights are not compensated: max |sum delta_c| = " << residual;
    if (!allow_uncompensated) throw ValidationError(os.str() + " (pass --allow-uncompensated-reweight to proceed)");
    warnings.push_back(os.str() + "; completeness of the new measure is lost");
  }
  return warnings;
}

SpectralModification compensated_pair(const SpectralData& ref, std::size_t from, std::size_t to, double weight) {
  if (from >= ref.size() || to >= ref.size()) throw DomainError("compensated_pair: atom index out of range");
  if (from == to) throw DomainError("compensated_pair: atoms must differ");
  if (!std::isfinite(weight) || weight <= 0.0) throw ValidationError("compensated_pair: weight must be positive");
  const auto gf = ref.gamma(from);
  const auto gt = ref.gamma(to);
  const double nf = norm2(gf);
  const double nt = norm2(gt);
  if (nf == 0.0 || nt == 0.0 || std::abs(dot(gf, gt)) / (nf * nt) < 1.0 - 1e-9) {
    std::ostringstream os;
    os << "compensated_pair: atoms " << from << " and " << to << " share no s-direction";
    throw ValidationError(os.str());
  }
  if (weight >= nf * nf) {
    std::ostringstream os;
    os << "compensated_pair: weight " << weight << " removes atom " << from << " (|Gamma|^2 = " << nf * nf << ")";
    throw InadmissibleError(os.str());
  }
  std::vector<double> u(gf.begin(), gf.end());
  for (auto& v : u) v /= nf;
  Matrix uu = outer(u);
  Matrix minus = uu;
  for (std::size_t i = 0; i < uu.rows(); ++i)
    for (std::size_t j = 0; j < uu.cols(); ++j) {
      uu(i, j) *= weight;
      minus(i, j) *= -weight;
    }
  SpectralModification mod;
  mod.reweights.push_back({from, std::move(minus)});
  mod.reweights.push_back({to, std::move(uu)});
  return mod;
}

SpectralModification darboux_reweighting(const SpectralData& ref, double mu) {
  if (!std::isfinite(mu)) throw ValidationError("darboux_reweighting: mu is not finite");
  if (ref.size() == 0) throw DomainError("darboux_reweighting: empty spectrum");
  if (!(mu < ref.eigenvalues.front())) {
    std::ostringstream os;
    os << "darboux_reweighting: mu = " << mu << " must lie below the spectrum (lambda_min = " << ref.eigenvalues.front()
       << ")";
    throw InadmissibleError(os.str());
  }
  const auto w = static_cast<std::size_t>(ref.grid.width());
  double z = 0.0;
  for (std::size_t nu = 0; nu < ref.size(); ++nu) z += (ref.eigenvalues[nu] - mu) * dot(ref.gamma(nu), ref.gamma(nu));
  z /= static_cast<double>(w);
  SpectralModification mod;
  for (std::size_t nu = 0; nu < ref.size(); ++nu) {
    Matrix dc = outer(ref.gamma(nu));
    const double f = (ref.eigenvalues[nu] - mu) / z - 1.0;
    for (std::size_t i = 0; i < w; ++i)
      for (std::size_t j = 0; j < w; ++j) dc(i, j) *= f;
    mod.reweights.push_back({nu, std::move(dc)});
  }
  return mod;
}

std::vector<std::vector<std::size_t>> shared_direction_groups(const SpectralData& ref, double tol) {
  std::vector<std::vector<std::size_t>> groups;
  std::vector<bool> used(ref.size(), false);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    groups.push_back({i});
    const double ni = norm2(ref.gamma(i));
    if (ni == 0.0) continue;
    for (std::size_t j = i + 1; j < ref.size(); ++j) {
      if (used[j]) continue;
      const double nj = norm2(ref.gamma(j));
      if (nj > 0.0 && std::abs(dot(ref.gamma(i), ref.gamma(j))) / (ni * nj) >= 1.0 - tol) {
        used[j] = true;
        groups.back().push_back(j);
      }
    }
  }
  return groups;
}

SpectralData modified_measure(const SpectralData& ref, const SpectralModification& mod, std::uint64_t provenance) {
  const auto w = static_cast<std::size_t>(ref.grid.width());
  const auto rew = summed_reweights(mod);
  std::vector<std::pair<double, std::vector<double>>> atoms;
  for (std::size_t nu = 0; nu < ref.size(); ++nu) {
    const auto g = ref.gamma(nu);
    auto it = rew.find(nu);
    if (it == rew.end()) {
      atoms.emplace_back(ref.eigenvalues[nu], std::vector<double>(g.begin(), g.end()));
      continue;
    }
    const Matrix c_new = plus(outer(g), it->second);
    const auto eig = eigendecompose(c_new, 1e-10);
    const double floor = 1e-14 * std::max(1.0, max_abs(c_new));
    for (std::size_t k = 0; k < w; ++k) {
      if (eig.values[k] <= floor) continue;
      std::vector<double> v(w);
      const double s = std::sqrt(eig.values[k]);
      for (std::size_t i = 0; i < w; ++i) v[i] = s * eig.vectors(i, k);
      atoms.emplace_back(ref.eigenvalues[nu], std::move(v));
    }
  }
  for (const auto& st : mod.added) atoms.emplace_back(st.lambda, st.gamma);
  std::stable_sort(atoms.begin(), atoms.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  SpectralData out;
  out.grid = ref.grid;
  out.provenance = provenance;
  out.gammas = Matrix(atoms.size(), w);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    out.eigenvalues.push_back(atoms[i].first);
    std::copy(atoms[i].second.begin(), atoms[i].second.end(), out.gammas.row(i).begin());
  }
  return out;
}

QKernel build_Q(const PolyTable& ref_table, const SpectralData& ref_sd, const SpectralModification& mod, Exec exec) {
  if (ref_table.provenance() != ref_sd.provenance || !(ref_table.grid() == ref_sd.grid))
    throw DomainError("build_Q: table and spectral data come from different potentials");
  validate_modification(ref_sd, mod, true);
  const GridSpec& g = ref_table.grid();
  const auto p = g.size();
  const auto w = static_cast<std::size_t>(g.width());

  // (Phi0(lambda), dC) per modified atom.
  std::vector<std::pair<Matrix, Matrix>> terms;
  for (const auto& st : mod.added) terms.emplace_back(eval_polytable(ref_table, st.lambda, exec), outer(st.gamma));
  for (const auto& [nu, dc] : summed_reweights(mod))
    terms.emplace_back(eval_polytable(ref_table, ref_sd.eigenvalues[nu], exec), dc);

  std::vector<Matrix> left;  // Phi0 dC
  for (const auto& [phi, dc] : terms) left.push_back(phi * dc);

  QKernel q{g, ref_table.provenance(), Matrix(p, p)};
  const auto np = static_cast<long>(p);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long j = 0; j < np; ++j)
    for (auto k = static_cast<std::size_t>(j); k < p; ++k) {
      double acc = 0.0;
      for (std::size_t t = 0; t < terms.size(); ++t)
        for (std::size_t s = 0; s < w; ++s) acc += left[t](j, s) * terms[t].first(k, s);
      q.values(j, k) = acc;
    }
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < j; ++k) q.values(j, k) = q.values(k, j);
  return q;
}

FactorizedKernel factorize(const PolyTable& ref_table, const SpectralData& ref_sd, const SpectralModification& mod) {
  if (ref_table.provenance() != ref_sd.provenance || !(ref_table.grid() == ref_sd.grid))
    throw DomainError("factorize: table and spectral data come from different potentials");
  validate_modification(ref_sd, mod, true);
  const GridSpec& g = ref_table.grid();
  const auto w = static_cast<std::size_t>(g.width());
  FactorizedKernel fk{g, {}, {}};
  for (const auto& st : mod.added) {
    fk.seeds.push_back(synthesize_state(ref_table, st.gamma, st.lambda));
    fk.signs.push_back(1);
  }
  for (const auto& [nu, dc] : summed_reweights(mod)) {
    const auto eig = eigendecompose(dc, 1e-10);
    const double floor = 1e-14 * std::max(1.0, max_abs(dc));
    const Matrix phi = eval_polytable(ref_table, ref_sd.eigenvalues[nu], Exec::serial);
    for (std::size_t k = 0; k < w; ++k) {
      const double d = eig.values[k];
      if (std::abs(d) <= floor) continue;
      std::vector<double> e(w);
      const double s = std::sqrt(std::abs(d));
      for (std::size_t i = 0; i < w; ++i) e[i] = s * eig.vectors(i, k);
      fk.seeds.push_back(synthesize_state(g, phi, e));
      fk.signs.push_back(d > 0.0 ? 1 : -1);
    }
  }
  return fk;
}

QKernel expand(const FactorizedKernel& fk) {
  const auto p = fk.grid.size();
  QKernel q{fk.grid, 0, Matrix(p, p)};
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < p; ++k) {
      double acc = 0.0;
      for (std::size_t t = 0; t < fk.rank(); ++t) acc += fk.signs[t] * fk.seeds[t].values[j] * fk.seeds[t].values[k];
      q.values(j, k) = acc;
    }
  return q;
}

double TransformKernel::cone_leakage() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < values.rows(); ++j) {
    const Site sj = grid.site(j);
    for (std::size_t k = 0; k < values.cols(); ++k)
      if (!in_cone(sj, grid.site(k))) worst = std::max(worst, std::abs(values(j, k)));
  }
  return worst;
}

DenseSolution solve_gl_dense(const QKernel& q, const DenseOptions& opts) {
  const GridSpec& g = q.grid;
  const auto p = g.size();
  const auto w = static_cast<std::size_t>(g.width());
  if (q.values.rows() != p || q.values.cols() != p) throw DomainError("solve_gl_dense: Q has the wrong shape");

  Matrix gram = q.values;
  for (std::size_t i = 0; i < p; ++i) gram(i, i) += 1.0;
  const double floor = 1e-14 * std::max(1.0, max_abs(gram));

  DenseSolution sol;
  sol.k = TransformKernel{g, Matrix(p, p)};
  Matrix& f = sol.k.values;
  Matrix gf(p, p);  // row i: G f_i

  for (int n = 0; n <= g.n_max; ++n) {
    const std::size_t lo = static_cast<std::size_t>(n) * w;
    Matrix r(w, p), gr(w, p);
    for (std::size_t a = 0; a < w; ++a) {
      auto ra = r.row(a);
      ra[lo + a] = 1.0;
      for (std::size_t i = 0; i < lo; ++i) {
        const double coef = dot(ra, gf.row(i));
        if (coef == 0.0) continue;
        const auto fi = f.row(i);
        for (std::size_t k = 0; k <= i; ++k) ra[k] -= coef * fi[k];
      }
      const auto gra = gram * std::span<const double>(ra);
      std::copy(gra.begin(), gra.end(), gr.row(a).begin());
    }
    std::vector<double> diag(w);
    for (std::size_t a = 0; a < w; ++a) {
      diag[a] = dot(r.row(a), gr.row(a));
      if (!(diag[a] > floor)) {
        std::ostringstream os;
        os << "Gram matrix I + Q is not positive definite at site " << site_str(g.site(lo + a)) << " (pivot "
           << diag[a] << ")";
        throw InadmissibleError(os.str());
      }
    }
    for (std::size_t a = 0; a < w; ++a)
      for (std::size_t b = a + 1; b < w; ++b) {
        const double c = std::abs(dot(r.row(a), gr.row(b))) / std::max(diag[a], diag[b]);
        if (c > sol.same_row_coupling) {
          sol.same_row_coupling = c;
          sol.worst_coupling_site = g.site(lo + a);
        }
      }
    for (std::size_t a = 0; a < w; ++a) {
      const double s = 1.0 / std::sqrt(diag[a]);
      auto fa = f.row(lo + a);
      auto ga = gf.row(lo + a);
      for (std::size_t k = 0; k < p; ++k) {
        fa[k] = r(a, k) * s;
        ga[k] = gr(a, k) * s;
      }
    }
  }

  sol.cone_leakage = sol.k.cone_leakage();
  const double limit = opts.structure_tol * std::max(1.0, max_abs(f));
  if (sol.same_row_coupling > opts.structure_tol || sol.cone_leakage > limit) {
    std::ostringstream os;
    os << "modification is structurally inconsistent with the lattice: same-row coupling " << sol.same_row_coupling
       << " (worst at " << site_str(sol.worst_coupling_site) << "), K leakage outside the cone " << sol.cone_leakage;
    if (!opts.allow_inconsistent) throw StructuralError(os.str());
    sol.warnings.push_back(os.str());
  }
  return sol;
}

DegenerateSolution solve_gl_degenerate(const FactorizedKernel& fk, Exec exec) {
  const GridSpec& g = fk.grid;
  const auto p = g.size();
  const std::size_t t = fk.rank();
  DegenerateSolution sol;
  sol.k = TransformKernel{g, Matrix(p, p)};
  sol.psi.assign(t, Field(g));
  const bool definite = std::all_of(fk.signs.begin(), fk.signs.end(), [](int s) { return s > 0; });

  std::vector<std::string> failure(p);
  const auto np = static_cast<long>(p);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long jl = 0; jl < np; ++jl) {
    const auto j = static_cast<std::size_t>(jl);
    const Site sj = g.site(j);
    const auto below = cone_below(g, sj.n, sj.m);
    Matrix mat(t, t);
    for (std::size_t a = 0; a < t; ++a) mat(a, a) = fk.signs[a];
    for (std::size_t k : below)
      for (std::size_t a = 0; a < t; ++a)
        for (std::size_t b = 0; b < t; ++b) mat(a, b) += fk.seeds[a].values[k] * fk.seeds[b].values[k];
    std::vector<double> x(t);
    for (std::size_t a = 0; a < t; ++a) x[a] = fk.seeds[a].values[j];
    const bool ok = definite ? cholesky_solve(mat, x) : lu_solve(mat, x);
    if (!ok) {
      failure[j] = "per-site system is singular or not positive definite at site " + site_str(sj);
      continue;
    }
    double nrm = 1.0;
    for (std::size_t a = 0; a < t; ++a) nrm += fk.seeds[a].values[j] * x[a];
    if (!(nrm > 0.0)) {
      failure[j] = "non-positive normalization 1 + psi0^T w at site " + site_str(sj);
      continue;
    }
    const double kd = 1.0 / std::sqrt(nrm);
    for (std::size_t a = 0; a < t; ++a) sol.psi[a].values[j] = kd * x[a];
    sol.k.values(j, j) = kd;
    for (std::size_t k : below) {
      double acc = 0.0;
      for (std::size_t a = 0; a < t; ++a) acc += kd * x[a] * fk.seeds[a].values[k];
      sol.k.values(j, k) = -acc;
    }
  }
  for (const auto& msg : failure)
    if (!msg.empty()) throw InadmissibleError(msg);
  return sol;
}

PolyTable transformed_solutions(const TransformKernel& k, const PolyTable& ref_table, Exec exec) {
  const GridSpec& g = ref_table.grid();
  if (!(k.grid == g)) throw DomainError("transformed_solutions: kernel and table grids differ");
  PolyTable out(g, 0);
  const auto p = g.size();
  const auto w = static_cast<std::size_t>(g.width());
  const auto np = static_cast<long>(p);
#pragma omp parallel for schedule(dynamic) if (exec == Exec::parallel)
  for (long jl = 0; jl < np; ++jl) {
    const auto j = static_cast<std::size_t>(jl);
    const std::size_t end = (j / w + 1) * w;  // every site with n' <= n
    for (int s = g.m_min; s <= g.m_max; ++s) {
      Polynomial acc;
      for (std::size_t kk = 0; kk < end; ++kk) {
        const double kv = k.values(j, kk);
        if (kv != 0.0) acc.add_scaled(ref_table.at(kk, s), kv);
      }
      acc.truncate(kCoeffTruncation);
      out.at(j, s) = std::move(acc);
    }
  }
  return out;
}

double gram_identity_deviation(const TransformKernel& k, const QKernel& q) {
  Matrix gram = q.values;
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += 1.0;
  const Matrix prod = (k.values * gram) * k.values.transposed();
  return max_abs_diff(prod, Matrix::identity(prod.rows()));
}

}  // namespace latgl
