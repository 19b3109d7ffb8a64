#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "latgl/darboux.hpp"
#include "latgl/errors.hpp"
#include "latgl/verify.hpp"
#include "support/scenarios.hpp"

using namespace latgl;

namespace {

Field random_field(const GridSpec& g, std::uint64_t seed, double lo = 0.5, double hi = 1.5) {
  std::mt19937_64 rng(seed);
  Field f(g);
  for (auto& v : f.values) v = scen::uniform(rng, lo, hi) * ((rng() & 1) ? 1.0 : -1.0);
  return f;
}

struct Christoffel {
  Potential ref;
  PolyTable table;
  SpectralData sd;
  TransformKernel k;
  Reconstruction rec;
  Field psi0, psi;
};

// rho -> (lambda - mu) rho0 / Z on a single chain.
Christoffel christoffel(int rows, std::uint64_t seed, double gap) {
  Christoffel c{make_potential(preset::SeededRandom{seed, {}}, {rows - 1, 0, 0}), {}, {}, {}, {}, {}, {}};
  c.table = propagate_polynomials(c.ref);
  c.sd = spectral_data(c.ref);
  const double mu = c.sd.eigenvalues.front() - gap;
  const auto mod = darboux_reweighting(c.sd, mu);
  c.k = solve_gl_dense(build_Q(c.table, c.sd, mod)).k;
  c.rec = reconstruct_potentials_from_K(c.k, c.ref);
  auto t = transformed_solutions(c.k, c.table);
  complete_boundary_row(c.rec, t, modified_measure(c.sd, mod, 0));
  const std::vector<double> e{1.0};
  c.psi0 = synthesize_state(c.table, e, mu);
  c.psi = darboux_gauge_from_kernel(c.k, c.psi0);
  return c;
}

}  // namespace

TEST(Reconstruct, IdentityKernelIsFixedPoint) {
  const auto pot = make_potential(preset::SeededRandom{9, {}}, {3, -1, 2});
  const TransformKernel id{pot.grid(), Matrix::identity(pot.grid().size())};
  const auto rec = reconstruct_potentials_from_K(id, pot);
  EXPECT_TRUE(rec.pot == pot);
  // b and c of the last row are flagged as copied
  EXPECT_EQ(rec.flagged.size(), static_cast<std::size_t>(2 * 4 - 1));
  for (const auto& f : rec.flagged) {
    EXPECT_EQ(f.n, 3);
    EXPECT_EQ(f.reason, kFlagCopied);
  }
}

TEST(Reconstruct, NonPositiveDiagonalThrows) {
  const auto pot = make_potential(preset::Free{}, {1, 0, 1});
  TransformKernel k{pot.grid(), Matrix::identity(4)};
  k.values(2, 2) = 0.0;
  EXPECT_THROW(reconstruct_potentials_from_K(k, pot), NumericError);
}

TEST(Reconstruct, AStaysPositiveAndResidualVanishes) {
  const auto ref = scen::decoupled({4, 0, 3}, 12);
  const auto table = propagate_polynomials(ref);
  const auto sd = spectral_data(ref);
  const auto mod = scen::channel_states(sd, 2, 4);
  const auto k = solve_gl_dense(build_Q(table, sd, mod)).k;
  const auto rec = reconstruct_potentials_from_K(k, ref);
  for (int n = 1; n <= 4; ++n)
    for (int m = 0; m <= 3; ++m) EXPECT_GT(rec.pot.a(n, m), 0.0);
  auto lams = sample_lambdas(sd, 10, 1);
  for (const auto& a : mod.added) lams.push_back(a.lambda);
  EXPECT_LE(equation_residual(rec.pot, transformed_solutions(k, table), lams).deviation, 1e-9);
}

TEST(Reconstruct, MeasureCompletionPreservesSpectrum) {
  const auto ref = make_potential(preset::SeededRandom{14, {}}, {4, 0, 0});
  const auto table = propagate_polynomials(ref);
  const auto sd = spectral_data(ref);
  const auto mod = compensated_pair(sd, 0, 3, 0.02);
  const auto k = solve_gl_dense(build_Q(table, sd, mod)).k;
  auto rec = reconstruct_potentials_from_K(k, ref);
  const auto copied = rec.pot;
  ASSERT_TRUE(complete_boundary_row(rec, transformed_solutions(k, table), modified_measure(sd, mod, 0)));
  EXPECT_EQ(rec.flagged.back().reason, kFlagMeasure);
  const auto with = isospectral_check(ref, rec.pot, 1e-8);
  const auto without = isospectral_check(ref, copied, 1e-8);
  EXPECT_TRUE(with.all_pass()) << with.table();
  EXPECT_GT(without.checks[0].deviation, 1e-3);
}

TEST(Reconstruct, CompletionSkippedForAddedStates) {
  const auto ref = make_potential(preset::SeededRandom{14, {}}, {3, 0, 0});
  const auto table = propagate_polynomials(ref);
  const auto sd = spectral_data(ref);
  SpectralModification mod;
  mod.added.push_back({6.0, {0.4}});
  const auto k = solve_gl_dense(build_Q(table, sd, mod)).k;
  auto rec = reconstruct_potentials_from_K(k, ref);
  EXPECT_FALSE(complete_boundary_row(rec, transformed_solutions(k, table), modified_measure(sd, mod, 0)));
}

TEST(ClosedForm, EqualFieldsWithConstantProductKeepA) {
  const GridSpec g{3, 0, 2};
  const auto ref = make_potential(preset::SeededRandom{1, {}}, g);
  Field ones(g, std::vector<double>(g.size(), 1.0));
  const auto rec = bargmann_potentials(ref, {ones}, {ones});
  for (int n = 1; n <= 3; ++n)
    for (int m = 0; m <= 2; ++m) EXPECT_EQ(rec.pot.a(n, m), ref.a(n, m));
}

TEST(ClosedForm, SingleStateAgreesWithMultiState) {
  const GridSpec g{4, 0, 3};
  const auto ref = make_potential(preset::SeededRandom{2, {}}, g);
  const auto psi0 = random_field(g, 10), psi = random_field(g, 11);
  const auto multi = bargmann_potentials(ref, {psi0}, {psi});
  const auto single = darboux_single(ref, psi0, psi);
  EXPECT_LE(compare_potentials(multi.pot, single.pot).max(), 1e-12);
}

TEST(ClosedForm, SingleStateCFormula) {
  const GridSpec g{4, 0, 3};
  const auto ref = make_potential(preset::SeededRandom{3, {}}, g);
  const auto psi0 = random_field(g, 20), psi = random_field(g, 21);
  const auto rec = darboux_single(ref, psi0, psi);
  for (int n = 1; n < 4; ++n)
    for (int m = 0; m <= 3; ++m) {
      const double expect = ref.a(n, m) * psi0(n - 1, m) / psi0(n, m) - ref.a(n + 1, m) * psi0(n, m) / psi0(n + 1, m);
      EXPECT_NEAR(rec.pot.c(n, m) - ref.c(n, m), expect, 1e-13);
    }
}

TEST(ClosedForm, ConstantFieldOnFreeReference) {
  const GridSpec g{4, 0, 3};
  const auto ref = make_potential(preset::Free{}, g);
  Field ones(g, std::vector<double>(g.size(), 1.0));
  const auto rec = darboux_single(ref, ones, ones);
  for (int n = 1; n < 4; ++n)
    for (int m = 0; m <= 3; ++m) EXPECT_EQ(rec.pot.c(n, m), 0.0);
}

TEST(ClosedForm, ZeroPsi0IsSingular) {
  const GridSpec g{3, 0, 2};
  const auto ref = make_potential(preset::Free{}, g);
  auto psi0 = random_field(g, 1);
  psi0(2, 1) = 0.0;
  try {
    darboux_single(ref, psi0, random_field(g, 2));
    FAIL() << "expected SingularTransformError";
  } catch (const SingularTransformError& e) {
    EXPECT_NE(std::string(e.what()).find("(2,1)"), std::string::npos) << e.what();
  }
  auto psi = random_field(g, 3);
  psi(1, 1) = 0.0;
  EXPECT_THROW(bargmann_potentials(ref, {random_field(g, 4)}, {psi}), SingularTransformError);
}

TEST(SolutionTransform, ZeroPsiGivesZeroTable) {
  const GridSpec g{3, 0, 2};
  const auto table = propagate_polynomials(make_potential(preset::Free{}, g));
  const auto out = darboux_solution_transform(random_field(g, 5), Field(g), table);
  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m <= 2; ++m)
      for (int s = 0; s <= 2; ++s) EXPECT_TRUE(out.at(n, m, s).is_zero());
}

TEST(SolutionTransform, BoundaryRow) {
  const GridSpec g{3, 0, 2};
  const auto table = propagate_polynomials(make_potential(preset::SeededRandom{6, {}}, g));
  const auto psi0 = random_field(g, 7), psi = random_field(g, 8);
  const auto out = darboux_solution_transform(psi0, psi, table);
  for (int m = 0; m <= 2; ++m)
    for (int s = 0; s <= 2; ++s) {
      if (m != s) {
        EXPECT_TRUE(out.at(0, m, s).is_zero());
        continue;
      }
      ASSERT_EQ(out.at(0, m, s).degree(), 0);
      EXPECT_DOUBLE_EQ(out.at(0, m, s).coeffs[0], -psi(0, m) * psi0(0, m));
    }
}

TEST(Christoffel, ClosedFormMatchesKernelRoute) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto c = christoffel(7, seed, 0.8);
    const auto closed = darboux_single(c.ref, c.psi0, c.psi);
    EXPECT_LE(compare_potentials(closed.pot, c.rec.pot, true).max(), 1e-9);
  }
}

TEST(Christoffel, KernelIsFactorized) {
  const auto c = christoffel(6, 4, 1.0);
  const GridSpec& g = c.k.grid;
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t k = 0; k <= j; ++k)
      EXPECT_NEAR(c.k.values(j, k), -c.psi.values[j] * c.psi0.values[k], 1e-12);
}

TEST(Christoffel, SolutionTransformSolvesNewEquation) {
  const auto c = christoffel(6, 5, 0.5);
  const auto closed = darboux_single(c.ref, c.psi0, c.psi);
  const auto table = darboux_solution_transform(c.psi0, c.psi, c.table);
  const auto lams = sample_lambdas(c.sd, 10, 3);
  EXPECT_LE(equation_residual(closed.pot, table, lams).deviation, 1e-9);
  const auto spectral = isospectral_check(c.ref, c.rec.pot, 1e-8);
  EXPECT_TRUE(spectral.all_pass()) << spectral.table();
}
