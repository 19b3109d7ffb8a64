#pragma once

#include <cstdint>
#include <vector>

#include "latgl/lattice.hpp"
#include "latgl/matrix.hpp"
#include "latgl/operator.hpp"
#include "latgl/polysolve.hpp"

namespace latgl {

/// Atoms of the spectral weight matrix of the truncated operator: one per
/// eigenpair, rho = sum_nu delta(lambda - lambda_nu) Gamma_nu Gamma_nu^T.
struct SpectralData {
  GridSpec grid;
  std::uint64_t provenance = 0;
  std::vector<double> eigenvalues;  // ascending
  Matrix gammas;                    // row nu: gamma_s(lambda_nu) = psi_nu(0, s)
  Matrix states;                    // row nu: psi_nu over sites, unit norm

  std::size_t size() const noexcept { return eigenvalues.size(); }
  std::span<const double> gamma(std::size_t nu) const { return gammas.row(nu); }
};

SpectralData spectral_data(const Potential& pot, double tol = 1e-12);

/// max |sum_nu Gamma_nu Gamma_nu^T - I| over the channel indices.
double completeness_deviation(const SpectralData& sd);

struct OrthogonalityResult {
  double max_deviation = 0.0;
  Site worst_row;
  Site worst_col;
};

/// Gram matrix of the polynomial solutions under rho, against the identity:
/// max over site pairs of |sum_nu (Phi(lambda_nu) Gamma_nu)_j (Phi(lambda_nu) Gamma_nu)_k - delta_jk|.
/// Throws DomainError when table and spectral data come from different potentials.
OrthogonalityResult check_orthogonality(const PolyTable& table, const SpectralData& sd, Exec exec = Exec::parallel);

/// psi(n,m) = sum_s phi_{ms}(n, lambda) gamma_s.
Field synthesize_state(const PolyTable& table, std::span<const double> gamma, double lambda);
Field synthesize_state(const GridSpec& grid, const Matrix& phi, std::span<const double> gamma);

}  // namespace latgl
