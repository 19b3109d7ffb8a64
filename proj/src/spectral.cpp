#include "latgl/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "latgl/errors.hpp"

namespace latgl {

SpectralData spectral_data(const Potential& pot, double tol) {
  pot.validate();
  const GridSpec& g = pot.grid();
  const auto eig = eigendecompose(assemble_dense(pot), tol);
  const auto p = g.size();
  const auto w = static_cast<std::size_t>(g.width());
  SpectralData sd{g, pot.fingerprint(), eig.values, Matrix(p, w), Matrix(p, p)};
  for (std::size_t nu = 0; nu < p; ++nu) {
    for (std::size_t j = 0; j < p; ++j) sd.states(nu, j) = eig.vectors(j, nu);
    for (std::size_t k = 0; k < w; ++k) sd.gammas(nu, k) = eig.vectors(k, nu);  // n = 0 slice
  }
  return sd;
}

double completeness_deviation(const SpectralData& sd) {
  const auto w = sd.gammas.cols();
  double worst = 0.0;
  for (std::size_t s = 0; s < w; ++s)
    for (std::size_t t = 0; t < w; ++t) {
      double acc = 0.0;
      for (std::size_t nu = 0; nu < sd.size(); ++nu) acc += sd.gammas(nu, s) * sd.gammas(nu, t);
      worst = std::max(worst, std::abs(acc - (s == t ? 1.0 : 0.0)));
    }
  return worst;
}

Field synthesize_state(const GridSpec& grid, const Matrix& phi, std::span<const double> gamma) {
  if (phi.cols() != gamma.size() || phi.rows() != grid.size())
    throw DomainError("synthesize_state: gamma length does not match the channel count");
  return Field(grid, phi * gamma);
}

Field synthesize_state(const PolyTable& table, std::span<const double> gamma, double lambda) {
  return synthesize_state(table.grid(), eval_polytable(table, lambda, Exec::serial), gamma);
}

OrthogonalityResult check_orthogonality(const PolyTable& table, const SpectralData& sd, Exec exec) {
  if (table.provenance() != sd.provenance || !(table.grid() == sd.grid))
    throw DomainError("check_orthogonality: table and spectral data come from different potentials");
  const GridSpec& g = table.grid();
  const auto p = g.size();
  // Row nu of `w`: the state synthesized from the polynomials at lambda_nu.
  Matrix w(sd.size(), p);
  const auto atoms = static_cast<long>(sd.size());
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long nu = 0; nu < atoms; ++nu) {
    const auto phi = eval_polytable(table, sd.eigenvalues[nu], Exec::serial);
    const auto psi = phi * sd.gamma(static_cast<std::size_t>(nu));
    std::copy(psi.begin(), psi.end(), w.row(static_cast<std::size_t>(nu)).begin());
  }

  std::vector<double> row_worst(p, 0.0);
  std::vector<std::size_t> row_arg(p, 0);
  const auto np = static_cast<long>(p);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
  for (long j = 0; j < np; ++j)
    for (std::size_t k = 0; k < p; ++k) {
      double acc = 0.0;
      for (std::size_t nu = 0; nu < sd.size(); ++nu) acc += w(nu, j) * w(nu, k);
      const double dev = std::abs(acc - (static_cast<std::size_t>(j) == k ? 1.0 : 0.0));
      if (dev > row_worst[j]) {
        row_worst[j] = dev;
        row_arg[j] = k;
      }
    }
  OrthogonalityResult res;
  for (std::size_t j = 0; j < p; ++j)
    if (row_worst[j] > res.max_deviation) {
      res.max_deviation = row_worst[j];
      res.worst_row = g.site(j);
      res.worst_col = g.site(row_arg[j]);
    }
  return res;
}

}  // namespace latgl
