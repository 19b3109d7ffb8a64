#include <gtest/gtest.h>

#include <cmath>

#include "latgl/errors.hpp"
#include "latgl/gelfand_levitan.hpp"
#include "support/scenarios.hpp"

using namespace latgl;

namespace {

struct Ref {
  Potential pot;
  PolyTable table;
  SpectralData sd;
};

Ref make_ref(const Potential& pot) { return {pot, propagate_polynomials(pot), spectral_data(pot)}; }

QKernel single_site_q(double q) {
  QKernel k{{0, 0, 0}, 0, Matrix(1, 1)};
  k.values(0, 0) = q;
  return k;
}

}  // namespace

TEST(BuildQ, EmptyModificationIsZero) {
  const auto r = make_ref(make_potential(preset::SeededRandom{3, {}}, {3, 0, 3}));
  const auto q = build_Q(r.table, r.sd, {});
  EXPECT_EQ(max_abs(q.values), 0.0);
}

TEST(BuildQ, SingleStateIsRankOneOuterProduct) {
  const auto r = make_ref(make_potential(preset::Free{}, {3, 0, 4}));
  const auto mod = scen::generic_states(r.sd, 1, 5);
  const auto q = build_Q(r.table, r.sd, mod);
  const auto psi0 = synthesize_state(r.table, mod.added[0].gamma, mod.added[0].lambda);
  for (std::size_t j = 0; j < psi0.values.size(); ++j)
    for (std::size_t k = 0; k < psi0.values.size(); ++k)
      EXPECT_NEAR(q.values(j, k), psi0.values[j] * psi0.values[k], 1e-12 * (1 + std::abs(q.values(j, k))));
  EXPECT_EQ(max_abs_diff(q.values, q.values.transposed()), 0.0);
}

TEST(BuildQ, TwoSiteWeightSwapByHand) {
  // atoms lambda = -1, +1 with gamma^2 = 1/2; phi(0) = 1, phi(1) = lambda.
  // Moving eps from +1 to -1: Q(0,0) = eps - eps, Q(0,1) = eps(-1) - eps(1), Q(1,1) = eps - eps.
  const auto r = make_ref(make_potential(preset::Free{}, {1, 0, 0}));
  const double eps = 0.125;
  const auto mod = compensated_pair(r.sd, 1, 0, eps);
  const auto q = build_Q(r.table, r.sd, mod);
  EXPECT_NEAR(q.values(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(q.values(0, 1), -2.0 * eps, 1e-15);
  EXPECT_NEAR(q.values(1, 0), -2.0 * eps, 1e-15);
  EXPECT_NEAR(q.values(1, 1), 0.0, 1e-15);
}

TEST(BuildQ, FactorizationExpandsToQ) {
  const auto r = make_ref(make_potential(preset::Free{}, {2, 0, 3}));
  auto mod = scen::uniform_pairs(r.sd, 0, 2, 0.05);
  const auto extra = scen::generic_states(r.sd, 2, 9);
  mod.added = extra.added;
  const auto q = build_Q(r.table, r.sd, mod);
  const auto e = expand(factorize(r.table, r.sd, mod));
  EXPECT_LE(max_abs_diff(q.values, e.values), 1e-12);
}

TEST(Validation, CollisionIsDomainError) {
  const auto r = make_ref(make_potential(preset::Free{}, {2, 0, 2}));
  SpectralModification mod;
  mod.added.push_back({r.sd.eigenvalues[3], std::vector<double>(3, 0.5)});
  EXPECT_THROW(validate_modification(r.sd, mod), DomainError);
  EXPECT_THROW(build_Q(r.table, r.sd, mod), DomainError);
}

TEST(Validation, BadGammaRejected) {
  const auto r = make_ref(make_potential(preset::Free{}, {2, 0, 2}));
  SpectralModification zero;
  zero.added.push_back({9.0, std::vector<double>(3, 0.0)});
  EXPECT_THROW(validate_modification(r.sd, zero), ValidationError);
  SpectralModification shape;
  shape.added.push_back({9.0, std::vector<double>(2, 1.0)});
  EXPECT_THROW(validate_modification(r.sd, shape), ValidationError);
}

TEST(Validation, UncompensatedNeedsOverride) {
  const auto r = make_ref(make_potential(preset::Free{}, {1, 0, 0}));
  SpectralModification mod;
  Matrix dc(1, 1);
  dc(0, 0) = 0.1;
  mod.reweights.push_back({0, dc});
  EXPECT_THROW(validate_modification(r.sd, mod), ValidationError);
  const auto warnings = validate_modification(r.sd, mod, true);
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Validation, IndefiniteWeightIsInadmissible) {
  const auto r = make_ref(make_potential(preset::Free{}, {1, 0, 0}));
  SpectralModification mod;
  Matrix up(1, 1), down(1, 1);
  up(0, 0) = 0.9;
  down(0, 0) = -0.9;
  mod.reweights.push_back({0, up});
  mod.reweights.push_back({1, down});
  EXPECT_THROW(validate_modification(r.sd, mod), InadmissibleError);
  EXPECT_THROW(compensated_pair(r.sd, 1, 0, 0.5), InadmissibleError);
}

TEST(Validation, CompensatedPairNeedsSharedDirection) {
  const auto r = make_ref(make_potential(preset::Free{}, {2, 0, 2}));
  EXPECT_THROW(compensated_pair(r.sd, 0, 8, 0.01), ValidationError);
}

TEST(Dense, ZeroQIsIdentity) {
  QKernel q{{2, 0, 2}, 0, Matrix(9, 9)};
  const auto sol = solve_gl_dense(q);
  EXPECT_EQ(sol.k.values, Matrix::identity(9));
}

TEST(Dense, SingleSiteNormalization) {
  const auto sol = solve_gl_dense(single_site_q(0.44));
  EXPECT_NEAR(sol.k.values(0, 0), 1.0 / std::sqrt(1.44), 1e-15);
}

TEST(Dense, TwoSiteMatchesInverseCholesky) {
  const auto r = make_ref(make_potential(preset::Free{}, {1, 0, 0}));
  SpectralModification mod;
  mod.added.push_back({3.0, {0.5}});
  const auto q = build_Q(r.table, r.sd, mod);
  // psi0 = (0.5, 1.5); G = I + psi0 psi0^T = L L^T, K = L^{-1}
  const double g00 = 1.25, g01 = 0.75, g11 = 3.25;
  const double l00 = std::sqrt(g00), l10 = g01 / l00, l11 = std::sqrt(g11 - l10 * l10);
  const auto sol = solve_gl_dense(q);
  EXPECT_NEAR(sol.k.values(0, 0), 1.0 / l00, 1e-14);
  EXPECT_NEAR(sol.k.values(1, 1), 1.0 / l11, 1e-14);
  EXPECT_NEAR(sol.k.values(1, 0), -l10 / (l00 * l11), 1e-14);
  EXPECT_EQ(sol.k.values(0, 1), 0.0);
}

TEST(Dense, IndefiniteGramIsInadmissible) {
  EXPECT_THROW(solve_gl_dense(single_site_q(-1.5)), InadmissibleError);
}

TEST(Dense, FreeLatticeGenericStateIsStructurallyInconsistent) {
  const auto r = make_ref(make_potential(preset::Free{}, {2, 0, 2}));
  const auto q = build_Q(r.table, r.sd, scen::generic_states(r.sd, 2, 4));
  EXPECT_THROW(solve_gl_dense(q), StructuralError);
  const auto sol = solve_gl_dense(q, {1e-9, true});
  EXPECT_GT(sol.same_row_coupling, 1e-3);
  EXPECT_EQ(sol.warnings.size(), 1u);
}

TEST(Degenerate, ZeroSeedIsIdentity) {
  const GridSpec g{2, 0, 2};
  FactorizedKernel fk{g, {Field(g)}, {1}};
  const auto sol = solve_gl_degenerate(fk);
  EXPECT_EQ(sol.k.values, Matrix::identity(g.size()));
  for (double v : sol.psi[0].values) EXPECT_EQ(v, 0.0);
}

TEST(Degenerate, SingleSiteMatchesDense) {
  const GridSpec g{0, 0, 0};
  Field seed(g);
  seed.values[0] = 0.8;
  const auto sol = solve_gl_degenerate({g, {seed}, {1}});
  EXPECT_NEAR(sol.k.values(0, 0), 1.0 / std::sqrt(1.64), 1e-15);
  EXPECT_NEAR(sol.k.values(0, 0), solve_gl_dense(single_site_q(0.64)).k.values(0, 0), 1e-15);
}

TEST(Degenerate, MatchesDenseOnDecoupledReference) {
  const auto r = make_ref(scen::decoupled({2, 0, 2}, 17));
  const auto mod = scen::channel_states(r.sd, 2, 3);
  const auto dense = solve_gl_dense(build_Q(r.table, r.sd, mod));
  const auto deg = solve_gl_degenerate(factorize(r.table, r.sd, mod));
  EXPECT_LE(max_abs_diff(dense.k.values, deg.k.values), 1e-9);
}

TEST(Degenerate, MatchesDenseForUniformStatesOnFreeLattice) {
  const auto r = make_ref(make_potential(preset::Free{}, {3, 0, 4}));
  const auto mod = scen::uniform_states(r.pot, 4.5, 0.6);
  const auto q = build_Q(r.table, r.sd, mod);
  const auto dense = solve_gl_dense(q);
  const auto deg = solve_gl_degenerate(factorize(r.table, r.sd, mod));
  EXPECT_LE(max_abs_diff(dense.k.values, deg.k.values), 1e-9);
  EXPECT_LE(gram_identity_deviation(deg.k, q), 1e-9);
  EXPECT_LE(deg.k.cone_leakage(), 1e-12);
}

TEST(Degenerate, SignedTermsMatchDense) {
  const auto r = make_ref(make_potential(preset::SeededRandom{6, {}}, {5, 0, 0}));
  const auto mod = compensated_pair(r.sd, 4, 1, 0.05);
  const auto fk = factorize(r.table, r.sd, mod);
  ASSERT_EQ(fk.rank(), 2u);
  EXPECT_NE(fk.signs[0], fk.signs[1]);
  const auto dense = solve_gl_dense(build_Q(r.table, r.sd, mod));
  const auto deg = solve_gl_degenerate(fk);
  EXPECT_LE(max_abs_diff(dense.k.values, deg.k.values), 1e-9);
}

TEST(Degenerate, AddedStatePsiSolvesNewRecursionAtLambda) {
  // psi_mu from the per-site solve equals the transformed solutions at lambda_mu.
  const auto r = make_ref(scen::decoupled({3, 0, 2}, 8));
  const auto mod = scen::channel_states(r.sd, 1, 1);
  const auto deg = solve_gl_degenerate(factorize(r.table, r.sd, mod));
  const auto table = transformed_solutions(deg.k, r.table);
  const auto psi = synthesize_state(table, mod.added[0].gamma, mod.added[0].lambda);
  for (std::size_t j = 0; j < psi.values.size(); ++j) EXPECT_NEAR(deg.psi[0].values[j], psi.values[j], 1e-12);
}

TEST(Kernel, EmptyModificationRoundTrip) {
  const auto r = make_ref(make_potential(preset::SeededRandom{2, {}}, {3, 0, 3}));
  const auto q = build_Q(r.table, r.sd, {});
  const auto dense = solve_gl_dense(q);
  const auto deg = solve_gl_degenerate(factorize(r.table, r.sd, {}));
  EXPECT_LE(max_abs_diff(dense.k.values, Matrix::identity(16)), 1e-12);
  EXPECT_LE(max_abs_diff(deg.k.values, Matrix::identity(16)), 1e-12);
}

TEST(Kernel, DiagonalPositiveAndLowerTriangular) {
  const auto r = make_ref(scen::decoupled({3, 0, 3}, 4));
  const auto mod = scen::channel_states(r.sd, 3, 2);
  const auto k = solve_gl_dense(build_Q(r.table, r.sd, mod)).k;
  const GridSpec& g = k.grid;
  for (std::size_t j = 0; j < g.size(); ++j) {
    EXPECT_GT(k.values(j, j), 0.0);
    for (std::size_t kk = 0; kk < g.size(); ++kk)
      if (g.site(kk).n > g.site(j).n || (g.site(kk).n == g.site(j).n && kk != j)) EXPECT_EQ(k.values(j, kk), 0.0);
  }
}

TEST(Transformed, IdentityKernelKeepsTable) {
  const auto r = make_ref(make_potential(preset::SeededRandom{3, {}}, {3, 0, 3}));
  const TransformKernel id{r.table.grid(), Matrix::identity(16)};
  auto t = transformed_solutions(id, r.table);
  t.set_provenance(r.table.provenance());
  EXPECT_TRUE(t == r.table);
}

TEST(Transformed, BoundaryRowIsRescaled) {
  const auto r = make_ref(make_potential(preset::Free{}, {3, 0, 4}));
  const auto mod = scen::uniform_states(r.pot, 4.2, 0.5);
  const auto k = solve_gl_dense(build_Q(r.table, r.sd, mod)).k;
  const auto t = transformed_solutions(k, r.table);
  for (int m = 0; m <= 4; ++m)
    for (int s = 0; s <= 4; ++s) {
      if (m == s) {
        ASSERT_EQ(t.at(0, m, s).degree(), 0);
        EXPECT_DOUBLE_EQ(t.at(0, m, s).coeffs[0], k.diag(0, m));
      } else {
        EXPECT_TRUE(t.at(0, m, s).is_zero());
      }
    }
}

TEST(Transformed, OrthonormalUnderNewMeasure) {
  const auto r = make_ref(make_potential(preset::Free{}, {3, 0, 4}));
  const auto mod = scen::uniform_states(r.pot, 4.2, 0.5);
  const auto k = solve_gl_dense(build_Q(r.table, r.sd, mod)).k;
  auto t = transformed_solutions(k, r.table);
  t.set_provenance(99);
  const auto measure = modified_measure(r.sd, mod, 99);
  EXPECT_EQ(measure.size(), r.sd.size() + 5);
  EXPECT_LE(check_orthogonality(t, measure).max_deviation, 1e-9);
}

TEST(Transformed, OrthogonalToLowerReferenceRows) {
  const auto r = make_ref(scen::decoupled({3, 0, 3}, 5));
  const auto mod = scen::channel_states(r.sd, 2, 6);
  const auto k = solve_gl_dense(build_Q(r.table, r.sd, mod)).k;
  const auto t = transformed_solutions(k, r.table);
  const auto measure = modified_measure(r.sd, mod, 0);
  const GridSpec& g = r.table.grid();
  double worst = 0.0;
  std::vector<Matrix> phi_new, phi_old;
  for (std::size_t a = 0; a < measure.size(); ++a) {
    phi_new.push_back(eval_polytable(t, measure.eigenvalues[a]));
    phi_old.push_back(eval_polytable(r.table, measure.eigenvalues[a]));
  }
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t kk = 0; kk < g.size(); ++kk) {
      if (g.site(kk).n >= g.site(j).n) continue;
      double acc = 0.0;
      for (std::size_t a = 0; a < measure.size(); ++a) {
        const auto gam = measure.gamma(a);
        double x = 0.0, y = 0.0;
        for (std::size_t s = 0; s < gam.size(); ++s) {
          x += phi_new[a](j, s) * gam[s];
          y += phi_old[a](kk, s) * gam[s];
        }
        acc += x * y;
      }
      worst = std::max(worst, std::abs(acc));
    }
  EXPECT_LE(worst, 1e-9);
}

TEST(Builders, DarbouxReweightingCompensatedIn1D) {
  const auto r = make_ref(make_potential(preset::SeededRandom{4, {}}, {4, 0, 0}));
  const auto mod = darboux_reweighting(r.sd, r.sd.eigenvalues.front() - 1.0);
  EXPECT_NO_THROW(validate_modification(r.sd, mod));
  EXPECT_THROW(darboux_reweighting(r.sd, r.sd.eigenvalues.front() + 0.1), InadmissibleError);
}

TEST(Builders, SectorsOnNonSquareFreeLattice) {
  const auto r = make_ref(make_potential(preset::Free{}, {2, 0, 3}));
  const auto groups = scen::sectors(r.sd);
  ASSERT_EQ(groups.size(), 4u);
  for (const auto& g : groups) EXPECT_EQ(g.size(), 3u);
}
