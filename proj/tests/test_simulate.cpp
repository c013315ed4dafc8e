#include <gtest/gtest.h>

#include "ximpact/errors.hpp"
#include "ximpact/gof.hpp"
#include "ximpact/models.hpp"
#include "ximpact/simulate.hpp"

using namespace ximpact;

namespace {

SimSpec small_spec(Mat lambda, Mat noise) {
  SimSpec s;
  s.n = lambda.rows();
  s.lambda_true = std::move(lambda);
  s.omega_true = Mat::Identity(s.n, s.n);
  s.noise_cov = std::move(noise);
  s.days = 20;
  s.bins_per_day = 500;
  s.seed = 3;
  return s;
}

std::vector<std::size_t> all_days(const MarketPanel& p) {
  std::vector<std::size_t> d(p.days.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = i;
  return d;
}

}  // namespace

TEST(AnalyticR2, Examples) {
  const SimSpec half = make_half_noise_scenario(1, 1, 10);
  const GroundTruth gt = ground_truth(half);
  for (const char* w : {"idio", "global", "modes", "identity"})
    EXPECT_NEAR(analytic_r2(gt, weight_matrix(WeightSpec::parse(w), gt.triple())), 0.5, 1e-14) << w;
  Mat L(2, 2);
  L << 1, 0.2, 0.1, 1;
  EXPECT_DOUBLE_EQ(analytic_r2(ground_truth(small_spec(L, Mat::Zero(2, 2))), Mat::Identity(2, 2)), 1.0);
  EXPECT_DOUBLE_EQ(analytic_r2(ground_truth(small_spec(Mat::Zero(2, 2), Mat::Identity(2, 2))), Mat::Identity(2, 2)),
                   0.0);
}

TEST(Simulate, NoiselessMlRecoversLambda) {
  Mat L(2, 2);
  L << 1.0, 0.3, 0.2, 0.8;
  const SimSpec s = small_spec(L, Mat::Zero(2, 2));
  const GroundTruth gt = ground_truth(s);
  EXPECT_LT((ml(gt.triple()) - L).norm(), 1e-14);
  const Simulation sim = simulate_panel(s);
  const CovarianceTriple emp = sample_triple(sim.panel, all_days(sim.panel));
  EXPECT_LT((ml(emp) - L).norm() / L.norm(), 1e-9);
}

TEST(Simulate, DeterministicPerSeed) {
  const SimSpec s = make_crude_scenario(5, 3, 50);
  const Simulation a = simulate_panel(s);
  const Simulation b = simulate_panel(s);
  ASSERT_EQ(a.panel.days.size(), b.panel.days.size());
  for (std::size_t d = 0; d < a.panel.days.size(); ++d) {
    EXPECT_EQ(a.panel.days[d].prices, b.panel.days[d].prices);
    EXPECT_EQ(a.panel.days[d].flows, b.panel.days[d].flows);
  }
  SimSpec other = s;
  other.seed = 6;
  EXPECT_NE(simulate_panel(other).panel.days[0].flows, a.panel.days[0].flows);
}

TEST(Simulate, RejectsZeroDays) {
  SimSpec s = make_half_noise_scenario(1, 1, 10);
  s.days = 0;
  EXPECT_THROW(simulate_panel(s), ValidationError);
}

TEST(CrudeScenario, SpreadKernel) {
  const SimSpec s = make_crude_scenario(1);
  const GroundTruth gt = ground_truth(s);
  const EigDecomp e = sym_eig(gt.sigma_total);
  EXPECT_LE(e.values(2), 1e-4 * e.values(0));
  const Vec v = e.vectors.col(2);
  const Mat K = kyle(gt.triple());
  EXPECT_LE((v * v.transpose() * K).norm(), 1e-8 * K.norm());
  const Mat M = ml(gt.triple());
  EXPECT_TRUE(M.allFinite());
  EXPECT_LT(M.norm(), 1e6);
}

TEST(CrudeScenario, SimulatedSpreadIsExact) {
  const Simulation sim = simulate_panel(make_crude_scenario(2, 2, 100));
  const SpreadSpec sp = crude_spread();
  const Index s = sim.panel.asset_index(sp.spread), a = sim.panel.asset_index(sp.leg_plus),
              b = sim.panel.asset_index(sp.leg_minus);
  const auto& d = sim.panel.days[0];
  for (Index t = 1; t < d.bins(); ++t) {
    const double ds = d.prices(t, s) - d.prices(t - 1, s);
    const double dl = (d.prices(t, a) - d.prices(t - 1, a)) - (d.prices(t, b) - d.prices(t - 1, b));
    EXPECT_NEAR(ds, dl, 1e-9);
  }
}

TEST(CorrelatedScenario, MinimumCorrelation) {
  const SimSpec s = make_correlated_scenario(10, 0.3, 4, 50, 7);
  const GroundTruth gt = ground_truth(s);
  const Vec sd = gt.sigma_total.diagonal().cwiseSqrt().cwiseInverse();
  const Mat rho = sd.asDiagonal() * gt.sigma_total * sd.asDiagonal();
  EXPECT_GE(rho.minCoeff(), 0.3 - 1e-12);
  EXPECT_LE((rho - Mat::Identity(10, 10)).maxCoeff(), 0.6 + 1e-12);
}
