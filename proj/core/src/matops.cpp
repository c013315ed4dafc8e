#include "ximpact/matops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ximpact/errors.hpp"

namespace ximpact {

namespace {

void require_square(const Mat& M, const char* what) {
  if (M.rows() != M.cols() || M.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << M.rows() << "x" << M.cols();
    throw ShapeError(os.str());
  }
}

double spectral_scale(const Vec& values) {
  return values.size() == 0 ? 0.0 : values.cwiseAbs().maxCoeff();
}

Mat rebuild(const EigDecomp& e, const Vec& f) {
  Mat out = e.vectors * f.asDiagonal() * e.vectors.transpose();
  return sym(out);
}

}  // namespace

void require_symmetric(const Mat& M, double tol) {
  require_square(M, "symmetric matrix");
  const double scale = M.cwiseAbs().maxCoeff();
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (!std::isfinite(scale) || asym > tol * scale) {
    std::ostringstream os;
    os << "max |M - M^T| = " << asym << " exceeds " << tol << " * " << scale;
    throw SymmetryViolation(os.str());
  }
}

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

EigDecomp sym_eig(const Mat& M) {
  require_symmetric(M);
  const Index n = M.rows();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(M));
  if (es.info() != Eigen::Success) throw NotPSD("eigen solver did not converge");

  EigDecomp out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index a = 0; a < n; ++a) {
    out.values(a) = es.eigenvalues()(n - 1 - a);
    Vec v = es.eigenvectors().col(n - 1 - a);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > 1e-12) {
        if (v(i) < 0) v = -v;
        break;
      }
    }
    out.vectors.col(a) = v;
  }
  return out;
}

Mat sqrt_psd(const Mat& M) {
  EigDecomp e = sym_eig(M);
  const double lmax = spectral_scale(e.values);
  Vec f(e.values.size());
  for (Index a = 0; a < e.values.size(); ++a) {
    const double l = e.values(a);
    if (l < -kPsdTol * lmax) {
      std::ostringstream os;
      os << "eigenvalue " << l << " below -" << kPsdTol << " * " << lmax;
      throw NotPSD(os.str());
    }
    f(a) = l <= kRankBand * lmax ? 0.0 : std::sqrt(l);
  }
  return rebuild(e, f);
}

Mat inv_sqrt_pd(const Mat& M) {
  EigDecomp e = sym_eig(M);
  if (e.values.minCoeff() <= 0.0) throw NotPD("smallest eigenvalue is not positive");
  return rebuild(e, e.values.cwiseSqrt().cwiseInverse());
}

Mat inv_pd(const Mat& M) {
  EigDecomp e = sym_eig(M);
  if (e.values.minCoeff() <= 0.0) throw NotPD("smallest eigenvalue is not positive");
  return rebuild(e, e.values.cwiseInverse());
}

Factor factorize(const Mat& M, FactorKind kind) {
  require_symmetric(M);
  if (kind == FactorKind::SymmetricRoot) {
    const EigDecomp e = sym_eig(M);
    if (!(e.values.minCoeff() > 0.0)) throw NotPD("symmetric root needs a positive definite matrix");
    return {sqrt_psd(M), kind};
  }
  Eigen::LLT<Mat> llt(sym(M));
  if (llt.info() != Eigen::Success) throw NotPD("Cholesky factorization failed");
  return {llt.matrixL(), kind};
}

Mat pinv_psd(const Mat& M, double rel_cutoff) {
  EigDecomp e = sym_eig(M);
  const double lmax = spectral_scale(e.values);
  Vec f = Vec::Zero(e.values.size());
  if (lmax == 0.0) return Mat::Zero(M.rows(), M.cols());
  for (Index a = 0; a < e.values.size(); ++a) {
    if (e.values(a) > rel_cutoff * lmax && e.values(a) > 0.0) f(a) = 1.0 / e.values(a);
  }
  return rebuild(e, f);
}

Projector projector(const Mat& basis) {
  if (basis.rows() == 0 || basis.cols() > basis.rows()) {
    throw BasisError("basis must have between 1 and n columns");
  }
  const Mat gram = basis.transpose() * basis;
  const double err = (gram - Mat::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (!(err <= 1e-10)) {
    std::ostringstream os;
    os << "columns are not orthonormal (max Gram error " << err << ")";
    throw BasisError(os.str());
  }
  return {sym(basis * basis.transpose()), basis};
}

Mat clip_psd(const Mat& M, double floor) {
  EigDecomp e = sym_eig(M);
  return rebuild(e, e.values.cwiseMax(floor));
}

double rel_frobenius(const Mat& A, const Mat& B) {
  const double nb = B.norm();
  return (A - B).norm() / (nb > 0.0 ? nb : 1.0);
}

}  // namespace ximpact
