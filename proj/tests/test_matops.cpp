#include <gtest/gtest.h>

#include <cmath>

#include "ximpact/errors.hpp"
#include "ximpact/matops.hpp"

using namespace ximpact;

namespace {

Mat m2(double a, double b, double c, double d) {
  Mat M(2, 2);
  M << a, b, c, d;
  return M;
}

}  // namespace

TEST(SymEig, DiagonalSortedDescending) {
  const EigDecomp e = sym_eig(Eigen::Vector2d(4, 1).asDiagonal().toDenseMatrix());
  EXPECT_DOUBLE_EQ(e.values(0), 4.0);
  EXPECT_DOUBLE_EQ(e.values(1), 1.0);
  EXPECT_NEAR(std::abs(e.vectors(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(e.vectors(1, 1)), 1.0, 1e-15);
}

TEST(SymEig, TwoByTwoCharacteristicPolynomial) {
  const EigDecomp e = sym_eig(m2(2, 1, 1, 2));
  EXPECT_NEAR(e.values(0), 3.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(e.vectors(0, 0), r, 1e-14);
  EXPECT_NEAR(e.vectors(1, 0), r, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors(0, 1)), r, 1e-14);
  EXPECT_NEAR(e.vectors(0, 1), -e.vectors(1, 1), 1e-14);
}

TEST(SymEig, Identity) {
  const EigDecomp e = sym_eig(Mat::Identity(3, 3));
  EXPECT_TRUE(e.values.isApprox(Vec::Ones(3)));
}

TEST(SymEig, RejectsAsymmetric) { EXPECT_THROW(sym_eig(m2(1, 2, 0, 1)), SymmetryViolation); }

TEST(SqrtPsd, Examples) {
  EXPECT_TRUE(sqrt_psd(m2(4, 0, 0, 9)).isApprox(m2(2, 0, 0, 3)));
  EXPECT_TRUE(sqrt_psd(Mat::Identity(5, 5)).isApprox(Mat::Identity(5, 5)));
  const Mat S = m2(2, 1, 1, 2);
  const Mat R = sqrt_psd(S);
  EXPECT_LT((R * R - S).norm(), 1e-14);
  EXPECT_LT((R - R.transpose()).norm(), 1e-15);
}

TEST(SqrtPsd, RejectsNegativeEigenvalue) { EXPECT_THROW(sqrt_psd(m2(1, 0, 0, -1)), NotPSD); }

TEST(SqrtPsd, ToleratesRoundoffNegatives) {
  const Mat S = m2(1, 0, 0, -1e-14);
  EXPECT_NO_THROW(sqrt_psd(S));
}

TEST(Factorize, SymmetricRootAndTriangular) {
  EXPECT_TRUE(factorize(m2(4, 0, 0, 1), FactorKind::SymmetricRoot).L.isApprox(m2(2, 0, 0, 1)));
  EXPECT_TRUE(factorize(Mat::Identity(3, 3), FactorKind::Triangular).L.isApprox(Mat::Identity(3, 3)));
  const Mat S = m2(2, 1, 1, 2);
  const Mat L = factorize(S, FactorKind::Triangular).L;
  EXPECT_DOUBLE_EQ(L(0, 1), 0.0);
  EXPECT_LT((L * L.transpose() - S).norm(), 1e-14);
}

TEST(Factorize, RequiresPD) {
  EXPECT_THROW(factorize(m2(1, 0, 0, 0), FactorKind::Triangular), NotPD);
  EXPECT_THROW(factorize(m2(1, 0, 0, 0), FactorKind::SymmetricRoot), NotPD);
}

TEST(PinvPsd, Examples) {
  EXPECT_TRUE(pinv_psd(m2(4, 0, 0, 0), 1e-12).isApprox(m2(0.25, 0, 0, 0)));
  EXPECT_TRUE(pinv_psd(Mat::Identity(3, 3), 1e-12).isApprox(Mat::Identity(3, 3)));
  Vec s(3);
  s << 1, 2, 2;
  s.normalize();
  const Mat P = s * s.transpose();
  EXPECT_LT((pinv_psd(P, 1e-12) - P).norm(), 1e-14);
  EXPECT_EQ(pinv_psd(Mat::Zero(2, 2), 1e-12).norm(), 0.0);
}

TEST(Projector, Examples) {
  Mat e1(2, 1);
  e1 << 1, 0;
  EXPECT_TRUE(projector(e1).P.isApprox(m2(1, 0, 0, 0)));
  Mat v(2, 1);
  v << 1, 1;
  v /= std::sqrt(2.0);
  EXPECT_LT((projector(v).P - m2(0.5, 0.5, 0.5, 0.5)).norm(), 1e-15);
  EXPECT_TRUE(projector(Mat::Identity(3, 3)).P.isApprox(Mat::Identity(3, 3)));
  EXPECT_EQ(projector(v).dim(), 1);
}

TEST(Projector, RejectsNonOrthonormalBasis) {
  Mat b(2, 1);
  b << 1, 1;
  EXPECT_THROW(projector(b), BasisError);
}

TEST(ClipPsd, Examples) {
  const Mat c = clip_psd(m2(4, 0, 0, 0), 1e-15);
  EXPECT_DOUBLE_EQ(c(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(c(1, 1), 1e-15);
  const Mat pd = m2(2, 1, 1, 2);
  EXPECT_LT((clip_psd(pd, 1e-15) - pd).norm(), 1e-14);
  EXPECT_TRUE(clip_psd(Mat::Zero(3, 3), 1e-15).isApprox(1e-15 * Mat::Identity(3, 3)));
}

TEST(InvSqrt, Consistency) {
  const Mat S = m2(2, 1, 1, 2);
  const Mat R = inv_sqrt_pd(S);
  EXPECT_LT((R * S * R - Mat::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((inv_pd(S) * S - Mat::Identity(2, 2)).norm(), 1e-14);
}
