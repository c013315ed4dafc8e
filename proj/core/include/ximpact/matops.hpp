#pragma once

#include <Eigen/Dense>

namespace ximpact {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

// Eigenvalues below -kPsdTol * lambda_max are rejected as not PSD.
inline constexpr double kPsdTol = 1e-12;
// Eigenvalues at or below kRankBand * lambda_max are treated as exact zeros
// when taking square roots.
inline constexpr double kRankBand = 1e-14;

struct EigDecomp {
  Vec values;   // descending
  Mat vectors;  // orthonormal columns, first significant component positive
};

enum class FactorKind { SymmetricRoot, Triangular };

struct Factor {
  Mat L;
  FactorKind kind;
};

struct Projector {
  Mat P;
  Mat basis;

  Index dim() const { return basis.cols(); }
  Mat complement() const { return Mat::Identity(P.rows(), P.cols()) - P; }
};

// Throws SymmetryViolation unless |M - M^T| <= tol * max|M_ij|.
void require_symmetric(const Mat& M, double tol = 1e-12);
Mat sym(const Mat& M);

EigDecomp sym_eig(const Mat& M);
Mat sqrt_psd(const Mat& M);
Mat inv_sqrt_pd(const Mat& M);
Mat inv_pd(const Mat& M);
Factor factorize(const Mat& M, FactorKind kind);
Mat pinv_psd(const Mat& M, double rel_cutoff);
Projector projector(const Mat& basis);
Mat clip_psd(const Mat& M, double floor);

double rel_frobenius(const Mat& A, const Mat& B);

}  // namespace ximpact
