#include <gtest/gtest.h>

#include <cmath>

#include "ximpact/axioms.hpp"
#include "ximpact/errors.hpp"

using namespace ximpact;

namespace {

TrialConfig quick(Index n = 4, int trials = 20) {
  TrialConfig c;
  c.n = n;
  c.trials = trials;
  return c;
}

Verdict verdict(const char* model, Axiom a, Index n = 4) {
  return check_axiom(ModelId::parse(model), a, quick(n)).verdict;
}

}  // namespace

TEST(GenTriple, ScalarAndDeterministic) {
  const CovarianceTriple s = gen_triple(1, 3, Profile::Well);
  EXPECT_GT(s.sigma(0, 0), 0.0);
  EXPECT_GT(s.omega(0, 0), 0.0);
  const CovarianceTriple a = gen_triple(3, 17, Profile::Ill);
  const CovarianceTriple b = gen_triple(3, 17, Profile::Ill);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.omega, b.omega);
  EXPECT_EQ(a.response, b.response);
}

TEST(GenTriple, KernelConditionHolds) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    EXPECT_LT(kernel_condition_residual(gen_triple(4, s, Profile::Well)), 1e-12);
    EXPECT_LT(kernel_condition_residual(gen_kernel_triple(4, 2, s).triple, 1e-10), 1e-10);
  }
}

TEST(GenKernelTriple, CalendarSpreadGeometry) {
  Mat v(2, 1);
  v << 1, -1;
  v /= std::sqrt(2.0);
  const KernelTriple k = gen_kernel_triple(v, 5);
  EXPECT_LT((k.triple.sigma * v).norm(), 1e-12 * k.triple.sigma.norm());
  const KernelTriple k3 = gen_kernel_triple(3, 1, 6);
  const EigDecomp e = sym_eig(k3.triple.sigma);
  EXPECT_GT(e.values(1), 1e-8 * e.values(0));
  EXPECT_LT(std::abs(e.values(2)), 1e-12 * e.values(0));
  EXPECT_EQ(k3.V.dim(), 1);
}

TEST(ScaleFlowLiquidity, Examples) {
  const CovarianceTriple t = gen_triple(2, 8, Profile::Well);
  const Projector all = projector(Mat::Identity(2, 2));
  const CovarianceTriple same = scale_flow_liquidity(t, all, 1.0);
  EXPECT_LT((same.omega - t.omega).norm(), 1e-15);
  const CovarianceTriple s = scale_flow_liquidity(t, all, 0.1);
  EXPECT_LT((s.omega - 0.01 * t.omega).norm(), 1e-14);
  EXPECT_LT((s.response - 0.1 * t.response).norm(), 1e-14);
  Mat e2(2, 1);
  e2 << 0, 1;
  const CovarianceTriple h = scale_flow_liquidity(t, projector(e2), 0.5);
  EXPECT_NEAR(h.omega(1, 1), 0.25 * t.omega(1, 1), 1e-14);
  EXPECT_NEAR(h.omega(0, 1), 0.5 * t.omega(0, 1), 1e-14);
  EXPECT_NEAR(h.omega(0, 0), t.omega(0, 0), 1e-14);
  EXPECT_LT((h.response.col(1) - 0.5 * t.response.col(1)).norm(), 1e-14);
  EXPECT_LT((h.response.col(0) - t.response.col(0)).norm(), 1e-14);
}

TEST(Classify, NoiseFloor) {
  EXPECT_EQ(classify(0.0, 1e-8), Verdict::Satisfied);
  EXPECT_EQ(classify(1e-3, 1e-8), Verdict::Violated);
  EXPECT_EQ(classify(1e-12, 1e-30), Verdict::Inconclusive);
}

TEST(SymmetryAxioms, Examples) {
  EXPECT_EQ(verdict("kyle", Axiom::RI), Verdict::Satisfied);
  EXPECT_EQ(verdict("whitening", Axiom::SI), Verdict::Violated);
  EXPECT_EQ(verdict("direct", Axiom::PI), Verdict::Satisfied);
}

TEST(ArbitrageAxioms, Examples) {
  EXPECT_EQ(verdict("ml", Axiom::DA), Verdict::Violated);
  EXPECT_EQ(verdict("r-el", Axiom::SA), Verdict::Violated);
  EXPECT_EQ(verdict("r-el", Axiom::DA), Verdict::Satisfied);
  for (const auto& m : table_models()) EXPECT_EQ(check_axiom(m, Axiom::SA, quick(1)).verdict, Verdict::Satisfied) << m.name();
}

TEST(FragmentationAxioms, Examples) {
  EXPECT_EQ(verdict("direct", Axiom::WFI), Verdict::Violated);
  EXPECT_EQ(verdict("kyle", Axiom::SFI), Verdict::Satisfied);
  EXPECT_EQ(verdict("ml", Axiom::WFI), Verdict::Satisfied);
}

TEST(Stability, KyleSelfBlockDiverges) {
  TrialConfig c = quick(4);
  const CovarianceTriple t = gen_triple(4, 21, Profile::Well);
  Mat e(4, 1);
  e << 0, 0, 0, 1;
  const SlopeResult k = stability_slope(ModelId::parse("kyle"), Block::SelfBlock, t, projector(e), c.eps_ladder);
  EXPECT_NEAR(k.slope, -1.0, 0.1);
  EXPECT_FALSE(k.bounded);
  const SlopeResult l = stability_slope(ModelId::parse("el"), Block::SelfBlock, t, projector(e), c.eps_ladder);
  EXPECT_NEAR(l.slope, 0.0, 0.1);
  const SlopeResult d = stability_slope(ModelId::parse("direct"), Block::CrossOffdiag, t, projector(e), c.eps_ladder);
  for (double x : d.norms) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(verdict("direct", Axiom::WCS), Verdict::Satisfied);
}

TEST(FitSlope, PowerLaw) {
  const std::vector<double> eps{1e-1, 1e-2, 1e-3};
  const SlopeResult r = fit_slope(eps, {10.0, 100.0, 1000.0});
  EXPECT_NEAR(r.slope, -1.0, 1e-12);
  EXPECT_FALSE(r.bounded);
  EXPECT_TRUE(fit_slope(eps, {1.0, 1.0, 1.0}).bounded);
}

TEST(Pcc, Examples) {
  EXPECT_EQ(verdict("kyle", Axiom::PCC), Verdict::Satisfied);
  EXPECT_EQ(verdict("whitening", Axiom::PCC), Verdict::Satisfied);
  EXPECT_EQ(verdict("el", Axiom::PCC), Verdict::Violated);
  const CovarianceTriple t = gen_triple(4, 2, Profile::Well);
  EXPECT_LT(covariance_consistency_residual(kyle(t), t), 1e-10);
  EXPECT_LT(distance_to_kyle(3.0 * kyle(t), t), 1e-12);
}

TEST(Lemma, Examples) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const LemmaResidual k = lemma_expansion_check(ModelId::parse("kyle"), 4, s, 1e-3);
    EXPECT_LE(k.a1, 1e-8);
    EXPECT_LE(k.a2, 1e-8);
  }
  const LemmaResidual m = lemma_expansion_check(ModelId::parse("ml"), 4, 1, 1.0);
  EXPECT_LE(m.a1, 1e-14);
  EXPECT_LE(m.a2, 1e-14);
  EXPECT_THROW(lemma_expansion_check(ModelId::parse("el"), 4, 1), PreconditionError);
}

TEST(KyleIdentities, Prop4AndFactorInvariance) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const CovarianceTriple t = gen_triple(2 + s % 5, s, Profile::Well);
    EXPECT_LT(kyle_factor_invariance_residual(t), 1e-10);
    EXPECT_LT(prop4_residual(t), 1e-10);
  }
}

TEST(AxiomMatrix, SubsetIsSubGridAndDeterministic) {
  TrialConfig c = quick(3, 10);
  const std::vector<ModelId> all{ModelId::parse("kyle"), ModelId::parse("el"), ModelId::parse("direct")};
  const AxiomReport full = axiom_matrix(all, c, {3});
  const AxiomReport sub = axiom_matrix({ModelId::parse("el")}, c, {3});
  const AxiomReport again = axiom_matrix(all, c, {3});
  for (Axiom a : kAxioms) {
    EXPECT_EQ(full.at(1, a).verdict, sub.at(0, a).verdict) << axiom_name(a);
    EXPECT_EQ(full.at(1, a).worst_residual, sub.at(0, a).worst_residual);
    for (std::size_t m = 0; m < all.size(); ++m)
      EXPECT_EQ(full.at(m, a).worst_residual, again.at(m, a).worst_residual);
  }
}

TEST(AxiomMatrix, KyleRowMatchesReference) {
  const AxiomReport r = axiom_matrix({ModelId::parse("kyle")}, quick(4, 20), {2, 4});
  EXPECT_TRUE(r.matches()) << (r.discrepancies.empty() ? "" : r.discrepancies[0].reason);
}

TEST(AxiomMatrix, TinyToleranceIsInconclusive) {
  TrialConfig c = quick(3, 5);
  c.tol = 1e-30;
  const AxiomReport r = axiom_matrix({ModelId::parse("kyle")}, c, {3});
  EXPECT_EQ(r.at(0, Axiom::PCC).verdict, Verdict::Inconclusive);
  EXPECT_FALSE(r.matches());
}

TEST(Names, RoundTrip) {
  for (Axiom a : kAxioms) EXPECT_EQ(parse_axiom(axiom_name(a)), a);
}
