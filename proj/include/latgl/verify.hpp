#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "latgl/lattice.hpp"
#include "latgl/operator.hpp"
#include "latgl/polysolve.hpp"
#include "latgl/spectral.hpp"

namespace latgl {

struct CheckResult {
  std::string name;
  double deviation = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  /// Location of the worst violation, free text.
  std::string where;
  /// Informational checks never fail a report.
  bool gating = true;
  std::string note;
};

CheckResult make_check(std::string name, double deviation, double tolerance, std::string where = {});

struct VerificationReport {
  std::vector<CheckResult> checks;

  void add(CheckResult c) { checks.push_back(std::move(c)); }
  /// True iff every gating check passes.
  bool all_pass() const;
  /// Fixed-width table, one line per check.
  std::string table() const;
};

/// Uniform draws on [lo, hi], reproducible from the seed on any platform.
std::vector<double> sample_lambdas(double lo, double hi, std::size_t count, std::uint64_t seed);

/// `count` seeded samples on [lambda_min - 1, lambda_max + 1].
std::vector<double> sample_lambdas(const SpectralData& sd, std::size_t count, std::uint64_t seed);

/// max over lambda, sites with n + 1 <= n_max and channels s of
/// |(H Phi)(n,m,s) - lambda Phi(n,m,s)| / max(1, max|Phi(lambda)|).
CheckResult equation_residual(const Potential& pot, const PolyTable& table, std::span<const double> lambdas,
                              double tol = 1e-9);

struct PotentialDiff {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  Site worst_a, worst_b, worst_c;

  double max() const noexcept { return std::max(a, std::max(b, c)); }
};

/// Entrywise differences per field. With `reconstructible_only`, b and c on
/// row n_max are skipped (no route reconstructs them).
PotentialDiff compare_potentials(const Potential& p1, const Potential& p2, bool reconstructible_only = false);

/// A state expected to be an eigenfield of the new operator.
struct EigenProbe {
  std::string label;
  double lambda = 0.0;
  Field psi;
};

/// Sorted spectra of both operators compared entrywise, plus
/// ||H psi - lambda psi||_inf / ||psi||_inf for each probe. With a nonempty
/// `inserted`, the spectra are expected to differ: the eigenvalue entry
/// becomes informational and lists the distance from each inserted lambda to
/// the new spectrum.
VerificationReport isospectral_check(const Potential& ref_pot, const Potential& new_pot, double tol,
                                     const std::vector<EigenProbe>& probes = {},
                                     std::span<const double> inserted = {}, double eig_tol = 1e-12);

}  // namespace latgl
