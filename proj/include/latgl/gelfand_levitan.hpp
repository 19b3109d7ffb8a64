#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latgl/lattice.hpp"
#include "latgl/matrix.hpp"
#include "latgl/operator.hpp"
#include "latgl/polysolve.hpp"
#include "latgl/spectral.hpp"

namespace latgl {

/// New bound state at lambda with normalization vector gamma (over channels).
struct AddedState {
  double lambda = 0.0;
  std::vector<double> gamma;
};

/// Change of the normalization matrix C_nu = Gamma_nu Gamma_nu^T of an
/// existing atom; delta_c is symmetric, width x width.
struct Reweight {
  std::size_t nu = 0;
  Matrix delta_c;
};

/// rho - rho0 as a list of added atoms and reweighted atoms.
struct SpectralModification {
  std::vector<AddedState> added;
  std::vector<Reweight> reweights;

  bool empty() const noexcept { return added.empty() && reweights.empty(); }
  bool isospectral() const noexcept { return added.empty() && !reweights.empty(); }
};

/// Checks a modification against the reference spectrum.
///
/// Added states: finite nonzero gamma, lambda away from every reference
/// eigenvalue (DomainError otherwise). Reweights: valid atom index, symmetric
/// delta_c, positive semidefinite new C_nu (InadmissibleError otherwise), and
/// sum of delta_c equal to zero so that completeness survives. An
/// uncompensated sum is a ValidationError unless `allow_uncompensated`, in
/// which case it is returned as a warning.
std::vector<std::string> validate_modification(const SpectralData& ref, const SpectralModification& mod,
                                               bool allow_uncompensated = false);

/// Moves `weight` of normalization from atom `from` to atom `to`. The two
/// Gamma vectors must be parallel (shared s-direction).
SpectralModification compensated_pair(const SpectralData& ref, std::size_t from, std::size_t to, double weight);

/// Reweights every atom by (lambda_nu - mu) / Z, i.e. rho -> (lambda - mu) rho0 / Z
/// with Z the mean of the diagonal of sum_nu (lambda_nu - mu) C_nu. Needs mu
/// below the spectrum. Compensated exactly when V_0 is a multiple of the identity.
SpectralModification darboux_reweighting(const SpectralData& ref, double mu);

/// Groups of atom indices whose Gamma vectors are parallel to within `tol`.
std::vector<std::vector<std::size_t>> shared_direction_groups(const SpectralData& ref, double tol = 1e-9);

/// Measure after the modification, as rank-1 atoms (a reweighted atom whose
/// new C has rank r contributes r atoms at the same lambda). `states` is left
/// empty; `provenance` tags the table the measure belongs to.
SpectralData modified_measure(const SpectralData& ref, const SpectralModification& mod, std::uint64_t provenance);

/// Q(j,k) over all site pairs, sites in n-major order.
struct QKernel {
  GridSpec grid;
  std::uint64_t provenance = 0;
  Matrix values;
};

/// Q(j,k) = sum over modified atoms of Phi0(lambda) dC Phi0(lambda)^T, with
/// dC = Gamma Gamma^T for added states and delta_c for reweights.
QKernel build_Q(const PolyTable& ref_table, const SpectralData& ref_sd, const SpectralModification& mod,
                Exec exec = Exec::parallel);

/// Q written as sum_t sign_t u_t u_t^T. Added states give u = psi0_mu
/// (sign +1); each reweight contributes the eigenvectors of delta_c mapped
/// through Phi0(lambda_nu).
struct FactorizedKernel {
  GridSpec grid;
  std::vector<Field> seeds;
  std::vector<int> signs;

  std::size_t rank() const noexcept { return seeds.size(); }
};

FactorizedKernel factorize(const PolyTable& ref_table, const SpectralData& ref_sd, const SpectralModification& mod);

/// sum_t sign_t u_t u_t^T as a QKernel.
QKernel expand(const FactorizedKernel& fk);

/// Orthogonalization coefficients K(j,k): row j expresses the new
/// polynomial of site j in the reference polynomials. Lower block-triangular
/// in n; entries outside the cone of j vanish when the modification respects
/// the lattice structure.
struct TransformKernel {
  GridSpec grid;
  Matrix values;

  double operator()(Site j, Site k) const { return values(grid.index(j), grid.index(k)); }
  double diag(int n, int m) const { return values(grid.index(n, m), grid.index(n, m)); }
  /// Zero when either site is off the grid.
  double at_or_zero(Site j, Site k) const noexcept {
    return grid.contains(j.n, j.m) && grid.contains(k.n, k.m) ? values(grid.index(j), grid.index(k)) : 0.0;
  }
  /// max |K(j,k)| over k outside the cone of j.
  double cone_leakage() const;
};

struct DenseOptions {
  double structure_tol = 1e-9;
  /// Downgrade the structural-inconsistency error to a warning.
  bool allow_inconsistent = false;
};

struct DenseSolution {
  TransformKernel k;
  /// max over same-n site pairs of |<r_j, r_k>| / max(<r_j,r_j>, <r_k,r_k>)
  /// after projecting out every lower row.
  double same_row_coupling = 0.0;
  Site worst_coupling_site;
  double cone_leakage = 0.0;
  std::vector<std::string> warnings;
};

/// Oracle route: sequential orthonormalization of the reference polynomials
/// under the Gram matrix I + Q, row by row in n. Throws InadmissibleError if
/// I + Q is not positive definite and StructuralError if the same-row
/// residuals couple or K leaks outside the cone (unless allowed).
DenseSolution solve_gl_dense(const QKernel& q, const DenseOptions& opts = {});

struct DegenerateSolution {
  /// psi_t(n,m) = K_d(n,m) w_t(n,m); for added states these are the new
  /// bound states at lambda_mu.
  std::vector<Field> psi;
  TransformKernel k;
};

/// Per-site reduction of the GL system for a factorized kernel: at each site
/// solve (S + P(n,m)) w = u(n,m), where P sums u u^T over the cone below the
/// site and S = diag(sign). Then K_d = [1 + u^T w]^{-1/2} and
/// K(j,k) = -sum_t psi_t(j) u_t(k). Sites are independent.
DegenerateSolution solve_gl_degenerate(const FactorizedKernel& fk, Exec exec = Exec::parallel);

/// phi_{ms}(lambda, n) = sum_{n' <= n} K(n,m;n',m') phi0_{m's}(lambda, n').
PolyTable transformed_solutions(const TransformKernel& k, const PolyTable& ref_table, Exec exec = Exec::parallel);

/// max_{j,k} |(K (I+Q) K^T)_{jk} - delta_jk|.
double gram_identity_deviation(const TransformKernel& k, const QKernel& q);

}  // namespace latgl
