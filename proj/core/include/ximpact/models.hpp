#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ximpact/matops.hpp"

namespace ximpact {

struct CovarianceTriple {
  Mat sigma;     // price-change covariance
  Mat omega;     // order-flow covariance
  Mat response;  // cross-covariance E[dp q^T]

  Index n() const { return sigma.rows(); }
};

// Shapes and symmetry only; PD/PSD requirements are enforced by the models.
void validate(const CovarianceTriple& t);

// max ||R^T v|| / (||R|| ||v||) over eigenvectors v of sigma with
// eigenvalue <= rel_cutoff * lambda_max; 0 when sigma has no kernel.
double kernel_condition_residual(const CovarianceTriple& t, double rel_cutoff = 1e-12);

Vec sigma_scale(const CovarianceTriple& t);
Vec omega_scale(const CovarianceTriple& t);

enum class Family {
  Direct,
  DirectSqrt,
  Whitening,
  El,
  Kyle,
  RDirect,
  RDirectLit,
  Ml,
  REl,
  RKyle,
};

struct ModelId {
  Family family = Family::Kyle;
  bool starred = false;

  std::string name() const;
  static ModelId parse(std::string_view name);
  friend bool operator==(const ModelId&, const ModelId&) = default;
};

// The eleven models of the reference table, in table order.
std::vector<ModelId> table_models();
// table_models() followed by the literal direct-sqrt and r-direct-lit forms.
std::vector<ModelId> catalogue();

bool split_invariant(Family f);

Mat direct(const CovarianceTriple& t);
Mat direct_sqrt(const CovarianceTriple& t);
Mat whitening(const CovarianceTriple& t);
Mat el(const CovarianceTriple& t);
// Evaluated through a factor of Sigma.
Mat kyle(const CovarianceTriple& t);
Mat kyle(const Mat& sigma, const Mat& omega);
// L^{-T} sqrt(L^T Sigma L) L^{-1} for the given factor L of Omega.
Mat kyle(const CovarianceTriple& t, FactorKind kind);
Mat kyle(const Mat& sigma, const Mat& omega, FactorKind kind);
Mat r_direct(const CovarianceTriple& t);
Mat r_direct_lit(const CovarianceTriple& t);
Mat ml(const CovarianceTriple& t);
Mat r_el(const CovarianceTriple& t);
Mat r_kyle(const CovarianceTriple& t);

Mat evaluate(Family f, const CovarianceTriple& t);
Mat star_transform(Family base, const CovarianceTriple& t);
Mat impact(const ModelId& m, const CovarianceTriple& t);

// Pairs of Sigma eigenvalues closer than 1e-10 * lambda_max; r-el depends on
// the basis chosen inside such a cluster.
bool degenerate_spectrum(const Mat& sigma);

Vec predict(const Mat& lambda, const Vec& q);
double expected_cost(const Mat& lambda, const Vec& xi);

}  // namespace ximpact
