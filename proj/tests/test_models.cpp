#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ximpact/axioms.hpp"
#include "ximpact/errors.hpp"
#include "ximpact/models.hpp"

using namespace ximpact;

namespace {

Mat diag2(double a, double b) { return Eigen::Vector2d(a, b).asDiagonal(); }

Mat m2(double a, double b, double c, double d) {
  Mat M(2, 2);
  M << a, b, c, d;
  return M;
}

CovarianceTriple triple(Mat s, Mat o, Mat r) { return {std::move(s), std::move(o), std::move(r)}; }

}  // namespace

TEST(ModelId, ParseAndName) {
  for (const auto& m : catalogue()) EXPECT_EQ(ModelId::parse(m.name()), m);
  EXPECT_EQ(ModelId::parse("el*").name(), "el*");
  EXPECT_THROW(ModelId::parse("nope"), ValidationError);
  EXPECT_EQ(table_models().size(), 11u);
}

TEST(Direct, Examples) {
  EXPECT_TRUE(direct(triple(diag2(16, 1), diag2(1, 1), Mat::Zero(2, 2))).isApprox(diag2(4, 1)));
  EXPECT_TRUE(direct(triple(diag2(1, 1), diag2(16, 1), Mat::Zero(2, 2))).isApprox(diag2(0.25, 1)));
  EXPECT_TRUE(direct_sqrt(triple(diag2(16, 1), diag2(1, 1), Mat::Zero(2, 2))).isApprox(diag2(2, 1)));
  EXPECT_THROW(direct(triple(diag2(1, 1), diag2(1, 0), Mat::Zero(2, 2))), DegenerateLiquidity);
}

TEST(Whitening, Examples) {
  EXPECT_TRUE(whitening(triple(diag2(4, 1), Mat::Identity(2, 2), Mat::Zero(2, 2))).isApprox(diag2(2, 1)));
  EXPECT_TRUE(whitening(triple(Mat::Identity(2, 2), diag2(4, 1), Mat::Zero(2, 2))).isApprox(diag2(0.5, 1)));
  const Mat S = m2(2, 1, 1, 2);
  EXPECT_LT((whitening(triple(S, Mat::Identity(2, 2), Mat::Zero(2, 2))) - sqrt_psd(S)).norm(), 1e-14);
  EXPECT_THROW(whitening(triple(S, diag2(1, 0), Mat::Zero(2, 2))), NotPD);
}

TEST(El, Examples) {
  EXPECT_TRUE(el(triple(diag2(4, 1), Mat::Identity(2, 2), Mat::Zero(2, 2))).isApprox(diag2(2, 1)));
  const double r3 = std::sqrt(3.0);
  const Mat expect = m2((r3 + 1) / 2, (r3 - 1) / 2, (r3 - 1) / 2, (r3 + 1) / 2);
  EXPECT_LT((el(triple(m2(2, 1, 1, 2), Mat::Identity(2, 2), Mat::Zero(2, 2))) - expect).norm(), 1e-14);
  // Kernel direction (1, -1) carries no impact.
  Vec v(2);
  v << 1, -1;
  const Mat S = m2(1, 1, 1, 1);
  const Mat L = el(triple(S, m2(2, 0.3, 0.3, 1), Mat::Zero(2, 2)));
  EXPECT_LT((L * v).norm(), 1e-14);
}

TEST(Kyle, Examples) {
  EXPECT_TRUE(kyle(triple(diag2(4, 1), Mat::Identity(2, 2), Mat::Zero(2, 2))).isApprox(diag2(2, 1)));
  EXPECT_TRUE(kyle(triple(Mat::Identity(2, 2), diag2(4, 1), Mat::Zero(2, 2))).isApprox(diag2(0.5, 1)));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CovarianceTriple t = gen_triple(4, seed, Profile::Well);
    const Mat L = kyle(t);
    EXPECT_LT((L * t.omega * L.transpose() - t.sigma).norm() / t.sigma.norm(), 1e-10);
    EXPECT_LT((kyle(t, FactorKind::Triangular) - L).norm() / L.norm(), 1e-10);
    EXPECT_LT((kyle(t, FactorKind::SymmetricRoot) - L).norm() / L.norm(), 1e-10);
  }
}

TEST(Kyle, KernelDirectionHasNoImpact) {
  const KernelTriple k = gen_kernel_triple(3, 1, 11);
  const Mat L = kyle(k.triple);
  EXPECT_LT((k.V.P * L).norm(), 1e-8 * L.norm());
}

TEST(RDirect, Examples) {
  EXPECT_TRUE(r_direct(triple(Mat::Identity(2, 2), Mat::Identity(2, 2), diag2(2, 3))).isApprox(diag2(2, 3)));
  EXPECT_TRUE(r_direct_lit(triple(Mat::Identity(2, 2), diag2(4, 9), diag2(2, 3))).isApprox(diag2(1, 1)));
  const Mat R = m2(2, 5, -7, 3);
  EXPECT_TRUE(r_direct(triple(Mat::Identity(2, 2), Mat::Identity(2, 2), R)).isApprox(diag2(2, 3)));
  EXPECT_THROW(r_direct(triple(Mat::Identity(2, 2), diag2(1, 0), R)), DegenerateLiquidity);
}

TEST(Ml, Examples) {
  EXPECT_TRUE(ml(triple(Mat::Identity(2, 2), diag2(4, 1), Mat::Identity(2, 2))).isApprox(diag2(0.25, 1)));
  const Mat Lstar = m2(1.5, -0.2, 0.7, 0.9);
  const Mat O = m2(2, 0.4, 0.4, 1);
  EXPECT_LT((ml(triple(Mat::Identity(2, 2), O, Lstar * O)) - Lstar).norm(), 1e-14);
}

TEST(REl, Examples) {
  EXPECT_TRUE(r_el(triple(diag2(4, 1), Mat::Identity(2, 2), diag2(2, 3))).isApprox(diag2(2, 3)));
  const CovarianceTriple t = gen_triple(3, 5, Profile::Well);
  EXPECT_LT((r_el(triple(t.sigma, t.omega, t.omega)) - Mat::Identity(3, 3)).norm(), 1e-12);
  const Mat S = Eigen::Vector3d(3, 2, 1).asDiagonal();
  const Mat O = Eigen::Vector3d(1, 2, 4).asDiagonal();
  const Mat R = Eigen::Vector3d(0.5, 1, 3).asDiagonal();
  EXPECT_LT((r_el(triple(S, O, R)) - ml(triple(S, O, R))).norm(), 1e-14);
}

TEST(RKyle, Examples) {
  const Mat S = m2(2, 1, 1, 2);
  const Mat R = sqrt_psd(S);
  EXPECT_LT((r_kyle(triple(S, Mat::Identity(2, 2), R)) - R).norm(), 1e-13);
  EXPECT_TRUE(r_kyle(triple(Mat::Identity(2, 2), Mat::Identity(2, 2), diag2(2, 3))).isApprox(diag2(2, 3)));
  // R = kyle(S, O) O gives R O^-1 R^T = S.
  const CovarianceTriple t = gen_triple(4, 9, Profile::Well);
  const Mat K = kyle(t);
  EXPECT_LT((r_kyle(triple(t.sigma, t.omega, K * t.omega)) - K).norm() / K.norm(), 1e-10);
}

TEST(Star, Examples) {
  const CovarianceTriple t = gen_triple(4, 3, Profile::Well);
  EXPECT_LT((star_transform(Family::Kyle, t) - kyle(t)).norm() / kyle(t).norm(), 1e-10);
  EXPECT_TRUE(star_transform(Family::El, triple(diag2(4, 1), Mat::Identity(2, 2), Mat::Zero(2, 2)))
                  .isApprox(diag2(2, 1)));
  EXPECT_GT((star_transform(Family::Whitening, t) - whitening(t)).norm(), 1e-6);
}

TEST(Star, ZeroVolatility) {
  const CovarianceTriple t = triple(diag2(1, 0), Mat::Identity(2, 2), Mat::Zero(2, 2));
  EXPECT_THROW(star_transform(Family::El, t), ZeroVolatility);
  EXPECT_NO_THROW(star_transform(Family::Kyle, t));
}

TEST(Predict, Examples) {
  EXPECT_TRUE(predict(Mat::Identity(2, 2), Eigen::Vector2d(1, 2)).isApprox(Eigen::Vector2d(1, 2)));
  EXPECT_TRUE(predict(diag2(2, 1), Eigen::Vector2d(1, 0)).isApprox(Eigen::Vector2d(2, 0)));
  EXPECT_EQ(predict(diag2(2, 1), Vec::Zero(2)).norm(), 0.0);
  EXPECT_THROW(predict(diag2(2, 1), Vec::Zero(3)), ShapeError);
}

TEST(Cost, Examples) {
  EXPECT_DOUBLE_EQ(expected_cost(diag2(2, 1), Eigen::Vector2d(1, 1)), 3.0);
  EXPECT_DOUBLE_EQ(expected_cost(diag2(2, 1), Vec::Zero(2)), 0.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  const CovarianceTriple t = gen_triple(5, 4, Profile::Well);
  const Mat K = kyle(t);
  for (int i = 0; i < 100; ++i) {
    Vec xi(5);
    for (auto& x : xi) x = nd(rng);
    EXPECT_GE(expected_cost(K, xi), 0.0);
  }
}

TEST(Validate, ShapeMismatch) {
  EXPECT_THROW(kyle(triple(Mat::Identity(2, 2), Mat::Identity(3, 3), Mat::Zero(2, 2))), ShapeError);
  EXPECT_THROW(kyle(triple(m2(1, 2, 0, 1), Mat::Identity(2, 2), Mat::Zero(2, 2))), SymmetryViolation);
}
