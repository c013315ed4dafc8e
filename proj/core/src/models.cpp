#include "ximpact/models.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "ximpact/errors.hpp"

namespace ximpact {

namespace {

struct FamilyName {
  Family family;
  std::string_view name;
};

constexpr std::array<FamilyName, 10> kNames{{
    {Family::Direct, "direct"},
    {Family::DirectSqrt, "direct-sqrt"},
    {Family::Whitening, "whitening"},
    {Family::El, "el"},
    {Family::Kyle, "kyle"},
    {Family::RDirect, "r-direct"},
    {Family::RDirectLit, "r-direct-lit"},
    {Family::Ml, "ml"},
    {Family::REl, "r-el"},
    {Family::RKyle, "r-kyle"},
}};

Vec diag_sqrt(const Mat& M, const char* what) {
  Vec d = M.diagonal();
  for (Index i = 0; i < d.size(); ++i) {
    if (!(d(i) >= 0.0)) {
      std::ostringstream os;
      os << what << " diagonal entry " << i << " is negative";
      throw NotPSD(os.str());
    }
  }
  return d.cwiseSqrt();
}

Vec require_liquidity(const CovarianceTriple& t) {
  Vec w = omega_scale(t);
  for (Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0.0)) {
      std::ostringstream os;
      os << "omega_" << i << " = 0";
      throw DegenerateLiquidity(os.str());
    }
  }
  return w;
}

void require_pd(const EigDecomp& e) {
  if (!(e.values.minCoeff() > 0.0)) throw NotPD("omega is not positive definite");
}

}  // namespace

void validate(const CovarianceTriple& t) {
  const Index n = t.sigma.rows();
  if (n == 0 || t.sigma.cols() != n || t.omega.rows() != n || t.omega.cols() != n ||
      t.response.rows() != n || t.response.cols() != n) {
    std::ostringstream os;
    os << "triple shapes disagree: sigma " << t.sigma.rows() << "x" << t.sigma.cols() << ", omega "
       << t.omega.rows() << "x" << t.omega.cols() << ", response " << t.response.rows() << "x"
       << t.response.cols();
    throw ShapeError(os.str());
  }
  require_symmetric(t.sigma);
  require_symmetric(t.omega);
  if (!t.response.allFinite()) throw ShapeError("response has non-finite entries");
}

double kernel_condition_residual(const CovarianceTriple& t, double rel_cutoff) {
  EigDecomp e = sym_eig(t.sigma);
  const double lmax = e.values.cwiseAbs().maxCoeff();
  const double nr = t.response.norm();
  double worst = 0.0;
  if (nr == 0.0) return 0.0;
  for (Index a = 0; a < e.values.size(); ++a) {
    if (e.values(a) <= rel_cutoff * lmax) {
      worst = std::max(worst, (t.response.transpose() * e.vectors.col(a)).norm() / nr);
    }
  }
  return worst;
}

Vec sigma_scale(const CovarianceTriple& t) { return diag_sqrt(t.sigma, "sigma"); }
Vec omega_scale(const CovarianceTriple& t) { return diag_sqrt(t.omega, "omega"); }

std::string ModelId::name() const {
  for (const auto& fn : kNames) {
    if (fn.family == family) return std::string(fn.name) + (starred ? "*" : "");
  }
  return "?";
}

ModelId ModelId::parse(std::string_view name) {
  ModelId id;
  if (!name.empty() && name.back() == '*') {
    id.starred = true;
    name.remove_suffix(1);
  }
  for (const auto& fn : kNames) {
    if (fn.name == name) {
      id.family = fn.family;
      return id;
    }
  }
  throw ValidationError("unknown model '" + std::string(name) + "'");
}

std::vector<ModelId> table_models() {
  return {{Family::Direct, false}, {Family::Whitening, false}, {Family::Whitening, true},
          {Family::El, false},     {Family::El, true},         {Family::Kyle, false},
          {Family::RDirect, false}, {Family::Ml, false},       {Family::REl, false},
          {Family::REl, true},     {Family::RKyle, false}};
}

std::vector<ModelId> catalogue() {
  auto out = table_models();
  out.push_back({Family::DirectSqrt, false});
  out.push_back({Family::RDirectLit, false});
  return out;
}

bool split_invariant(Family f) {
  switch (f) {
    case Family::Direct:
    case Family::Kyle:
    case Family::RDirect:
    case Family::Ml:
    case Family::RKyle:
      return true;
    default:
      return false;
  }
}

Mat direct(const CovarianceTriple& t) {
  validate(t);
  Vec w = require_liquidity(t);
  return sigma_scale(t).cwiseQuotient(w).asDiagonal();
}

Mat direct_sqrt(const CovarianceTriple& t) {
  validate(t);
  Vec w = require_liquidity(t);
  return sigma_scale(t).cwiseSqrt().cwiseQuotient(w.cwiseSqrt()).asDiagonal();
}

Mat whitening(const CovarianceTriple& t) {
  validate(t);
  return sqrt_psd(t.sigma) * inv_sqrt_pd(t.omega);
}

Mat el(const CovarianceTriple& t) {
  validate(t);
  require_pd(sym_eig(t.omega));
  EigDecomp e = sym_eig(t.sigma);
  const double lmax = e.values.cwiseAbs().maxCoeff();
  const Index n = t.n();
  Mat out = Mat::Zero(n, n);
  for (Index a = 0; a < n; ++a) {
    const double l = e.values(a);
    if (l < -kPsdTol * lmax) throw NotPSD("sigma has a negative eigenvalue");
    if (l <= kRankBand * lmax) continue;
    const Vec s = e.vectors.col(a);
    out += (std::sqrt(l) / std::sqrt(s.dot(t.omega * s))) * s * s.transpose();
  }
  return sym(out);
}

Mat kyle(const Mat& sigma, const Mat& omega, FactorKind kind) {
  const Index n = omega.rows();
  if (sigma.rows() != n || sigma.cols() != n) throw ShapeError("sigma and omega sizes differ");
  Mat L, Linv;
  if (kind == FactorKind::Triangular) {
    L = factorize(omega, kind).L;
    Linv = L.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  } else {
    EigDecomp e = sym_eig(omega);
    require_pd(e);
    const Vec r = e.values.cwiseSqrt();
    L = sym(e.vectors * r.asDiagonal() * e.vectors.transpose());
    Linv = sym(e.vectors * r.cwiseInverse().asDiagonal() * e.vectors.transpose());
  }
  // L^{-T} sqrt(L^T Sigma L) L^{-1}
  const Mat inner = sym(L.transpose() * sigma * L);
  return sym(Linv.transpose() * sqrt_psd(inner) * Linv);
}

// G (G^T Omega G)^{-1/2} G^T with G = Sigma^{1/2}. Equal to the factored form
// but never inverts Omega, so near-singular Omega along ker(Sigma) is harmless.
Mat kyle(const Mat& sigma, const Mat& omega) {
  const Index n = omega.rows();
  if (sigma.rows() != n || sigma.cols() != n) throw ShapeError("sigma and omega sizes differ");
  require_pd(sym_eig(omega));
  const Mat G = sqrt_psd(sigma);
  const EigDecomp e = sym_eig(sym(G * omega * G));
  const double top = e.values.size() > 0 ? e.values(0) : 0.0;
  Vec f = Vec::Zero(n);
  for (Index a = 0; a < n; ++a)
    if (e.values(a) > kRankBand * top) f(a) = 1.0 / std::sqrt(e.values(a));
  return sym(G * e.vectors * f.asDiagonal() * e.vectors.transpose() * G);
}

Mat kyle(const CovarianceTriple& t) {
  validate(t);
  return kyle(t.sigma, t.omega);
}

Mat kyle(const CovarianceTriple& t, FactorKind kind) {
  validate(t);
  return kyle(t.sigma, t.omega, kind);
}

Mat r_direct(const CovarianceTriple& t) {
  validate(t);
  require_liquidity(t);
  return t.response.diagonal().cwiseQuotient(t.omega.diagonal()).asDiagonal();
}

Mat r_direct_lit(const CovarianceTriple& t) {
  validate(t);
  Vec w = require_liquidity(t);
  return t.response.diagonal().cwiseQuotient(w).asDiagonal();
}

Mat ml(const CovarianceTriple& t) {
  validate(t);
  return t.response * inv_pd(t.omega);
}

Mat r_el(const CovarianceTriple& t) {
  validate(t);
  require_pd(sym_eig(t.omega));
  EigDecomp e = sym_eig(t.sigma);
  const double lmax = e.values.cwiseAbs().maxCoeff();
  const Index n = t.n();
  Mat out = Mat::Zero(n, n);
  for (Index a = 0; a < n; ++a) {
    // Kernel modes of Sigma carry s^T R s = 0 under ker(Sigma) in ker(R^T).
    if (e.values(a) <= kRankBand * lmax) continue;
    const Vec s = e.vectors.col(a);
    out += (s.dot(t.response * s) / s.dot(t.omega * s)) * s * s.transpose();
  }
  return sym(out);
}

Mat r_kyle(const CovarianceTriple& t) {
  validate(t);
  const Mat a = t.response * inv_sqrt_pd(t.omega);
  return kyle(sym(a * a.transpose()), t.omega);
}

Mat evaluate(Family f, const CovarianceTriple& t) {
  switch (f) {
    case Family::Direct: return direct(t);
    case Family::DirectSqrt: return direct_sqrt(t);
    case Family::Whitening: return whitening(t);
    case Family::El: return el(t);
    case Family::Kyle: return kyle(t);
    case Family::RDirect: return r_direct(t);
    case Family::RDirectLit: return r_direct_lit(t);
    case Family::Ml: return ml(t);
    case Family::REl: return r_el(t);
    case Family::RKyle: return r_kyle(t);
  }
  throw ValidationError("unhandled model family");
}

Mat star_transform(Family base, const CovarianceTriple& t) {
  validate(t);
  Vec s = sigma_scale(t);
  if (!(s.minCoeff() > 0.0)) {
    // The transform is the identity on split-invariant families.
    if (split_invariant(base)) return evaluate(base, t);
    throw ZeroVolatility("star transform needs sigma_i > 0 for every asset");
  }
  const Vec inv = s.cwiseInverse();
  CovarianceTriple r;
  r.sigma = sym(inv.asDiagonal() * t.sigma * inv.asDiagonal());
  r.omega = sym(s.asDiagonal() * t.omega * s.asDiagonal());
  r.response = inv.asDiagonal() * t.response * s.asDiagonal();
  return s.asDiagonal() * evaluate(base, r) * s.asDiagonal();
}

Mat impact(const ModelId& m, const CovarianceTriple& t) {
  return m.starred ? star_transform(m.family, t) : evaluate(m.family, t);
}

bool degenerate_spectrum(const Mat& sigma) {
  EigDecomp e = sym_eig(sigma);
  const double lmax = e.values.cwiseAbs().maxCoeff();
  for (Index a = 1; a < e.values.size(); ++a) {
    if (e.values(a - 1) - e.values(a) < 1e-10 * lmax) return true;
  }
  return false;
}

Vec predict(const Mat& lambda, const Vec& q) {
  if (lambda.cols() != q.size()) throw ShapeError("impact matrix and flow vector sizes differ");
  return lambda * q;
}

double expected_cost(const Mat& lambda, const Vec& xi) {
  if (lambda.rows() != lambda.cols() || lambda.cols() != xi.size()) {
    throw ShapeError("impact matrix and portfolio sizes differ");
  }
  return xi.dot(lambda * xi);
}

}  // namespace ximpact
