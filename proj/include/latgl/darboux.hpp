#pragma once

#include <string>
#include <vector>

#include "latgl/gelfand_levitan.hpp"
#include "latgl/lattice.hpp"
#include "latgl/operator.hpp"
#include "latgl/polysolve.hpp"
#include "latgl/spectral.hpp"

namespace latgl {

/// A coefficient that was not produced by the formulas: either copied from
/// the reference or completed from the spectral measure.
struct FlaggedEntry {
  char field = 'c';  // 'a', 'b' or 'c'
  int n = 0;
  int m = 0;
  std::string reason;
};

struct Reconstruction {
  Potential pot;
  std::vector<FlaggedEntry> flagged;
};

inline constexpr const char* kFlagCopied = "copied";
inline constexpr const char* kFlagMeasure = "measure-completed";

/// New potential from the orthogonalization coefficients:
///   a(n+1,m) = a0(n+1,m) K(n,m;n,m) / K(n+1,m;n+1,m)
///   c(n,m)   = c0(n,m) + a0(n,m) K(n,m;n-1,m)/K(n,m;n,m) - a0(n+1,m) K(n+1,m;n,m)/K(n+1,m;n+1,m)
///   b(n,m+1) = [b0(n,m+1) K(n,m;n,m) + a0(n,m+1) K(n,m;n-1,m+1) - a(n+1,m) K(n+1,m;n,m+1)] / K(n,m+1;n,m+1)
/// b and c on row n_max need K at n_max + 1 and are copied from the
/// reference (flagged). Throws NumericError on a non-positive K diagonal.
Reconstruction reconstruct_potentials_from_K(const TransformKernel& k, const Potential& ref_pot);

/// Fills b and c on row n_max from the new measure,
///   c(N,m) = sum_nu lambda_nu w_nu(N,m)^2,  b(N,m+1) = sum_nu lambda_nu w_nu(N,m) w_nu(N,m+1),
/// with w_nu = Phi(lambda_nu) Gamma_nu from the transformed table. Valid when
/// the measure has exactly one atom per site (pure reweights); otherwise the
/// copied row is left alone. Returns true if the row was completed.
bool complete_boundary_row(Reconstruction& rec, const PolyTable& new_table, const SpectralData& new_measure);

/// Closed-form potentials from the sums S(j;k) = sum_mu psi_mu(j) psi0_mu(k);
/// same window and flags as reconstruct_potentials_from_K. Throws
/// SingularTransformError naming the site when a denominator
/// S(j;j) falls below 1e-12 times the field scale.
Reconstruction bargmann_potentials(const Potential& ref_pot, const std::vector<Field>& psi0,
                                   const std::vector<Field>& psi);

/// One-state formulas: a from psi psi0 ratios, b through the prefactor
/// psi(n,m)/psi(n,m+1), c from psi0 alone.
Reconstruction darboux_single(const Potential& ref_pot, const Field& psi0, const Field& psi);

/// phi_{ms}(lambda,n) = -psi(n,m) sum over the cone of psi0(n',m') phi0_{m's}(lambda,n').
PolyTable darboux_solution_transform(const Field& psi0, const Field& psi, const PolyTable& ref_table,
                                     Exec exec = Exec::parallel);

/// psi(j) = -K(j,j) / psi0(j): the special solution for which the
/// factorized kernel -psi(j) psi0(k) matches K on the diagonal.
Field darboux_gauge_from_kernel(const TransformKernel& k, const Field& psi0);

}  // namespace latgl
