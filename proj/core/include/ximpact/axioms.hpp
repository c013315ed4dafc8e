#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ximpact/models.hpp"

namespace ximpact {

enum class Axiom { PI, DI, CI, SI, RI, SA, DA, WFI, SSFI, SFI, WCS, SCS, SS, PCC };

inline constexpr std::array<Axiom, 14> kAxioms{
    Axiom::PI,  Axiom::DI,   Axiom::CI,  Axiom::SI,  Axiom::RI,  Axiom::SA,  Axiom::DA,
    Axiom::WFI, Axiom::SSFI, Axiom::SFI, Axiom::WCS, Axiom::SCS, Axiom::SS,  Axiom::PCC};

std::string_view axiom_name(Axiom a);
Axiom parse_axiom(std::string_view s);

enum class Verdict { Satisfied, Violated, Inconclusive };
std::string_view verdict_name(Verdict v);

enum class Profile { Well, Ill };
enum class Block { CrossOffdiag, LiquidBlock, SelfBlock };

// Residuals in (tol, kNoiseFloor] are inconclusive when tol < kNoiseFloor.
inline constexpr double kNoiseFloor = 1e-7;
inline constexpr double kSlopeThreshold = 0.2;
inline constexpr double kProjectionFloor = 1e-12;

struct TrialConfig {
  Index n = 4;
  int trials = 100;
  double tol = 1e-8;
  std::uint64_t seed = 20240601;
  std::vector<double> eps_ladder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  Index kernel_dim = 0;  // 0 draws dim(V) per trial from [1, max(1, n/2)]

  void validate() const;
};

struct Witness {
  int trial = -1;
  Index n = 0;
  std::uint64_t seed = 0;
  std::string detail;
};

struct AxiomVerdict {
  ModelId model;
  Axiom axiom = Axiom::PI;
  Verdict verdict = Verdict::Inconclusive;
  double worst_residual = 0.0;
  Witness witness;
  std::string note;
};

Verdict classify(double worst, double tol);

CovarianceTriple gen_triple(Index n, std::uint64_t seed, Profile profile);

struct KernelTriple {
  CovarianceTriple triple;
  Projector V;
};
KernelTriple gen_kernel_triple(Index n, Index kernel_dim, std::uint64_t seed);
// Kernel triple whose Sigma vanishes on the span of the given orthonormal basis.
KernelTriple gen_kernel_triple(const Mat& kernel_basis, std::uint64_t seed);

CovarianceTriple scale_flow_liquidity(const CovarianceTriple& t, const Projector& V, double eps);
CovarianceTriple scale_price_volatility(const CovarianceTriple& t, const Projector& V, double eps);
// (Pbar Sigma Pbar, clip(Pbar Omega Pbar), Pbar R Pbar) with the Omega floor
// at floor_rel * lambda_max(Omega).
CovarianceTriple project_statistics(const CovarianceTriple& t, const Projector& V,
                                    double floor_rel = kProjectionFloor);

AxiomVerdict check_symmetry_axiom(const ModelId& m, Axiom a, const TrialConfig& cfg);
AxiomVerdict check_arbitrage_axiom(const ModelId& m, Axiom a, const TrialConfig& cfg);
AxiomVerdict check_fragmentation_axiom(const ModelId& m, Axiom a, const TrialConfig& cfg);
AxiomVerdict check_stability_axiom(const ModelId& m, Axiom a, const TrialConfig& cfg);
AxiomVerdict check_pcc(const ModelId& m, const TrialConfig& cfg);
AxiomVerdict check_axiom(const ModelId& m, Axiom a, const TrialConfig& cfg);

struct SlopeResult {
  std::vector<double> norms;
  double slope = 0.0;       // least squares over the whole ladder
  double tail_slope = 0.0;  // last three rungs
  double last_slope = 0.0;  // last decade
  bool bounded = true;      // some fit is >= -kSlopeThreshold
};

SlopeResult fit_slope(const std::vector<double>& eps, const std::vector<double>& norms);
SlopeResult stability_slope(const ModelId& m, Block b, const CovarianceTriple& t,
                            const Projector& V, const std::vector<double>& ladder);

struct LemmaResidual {
  double a1 = 0.0;  // Lambda(q) = Pe^-1 Lambda(p) Pe^-1
  double a2 = 0.0;  // Lambda(p) = Pe Lambda(q) Pe
};
LemmaResidual lemma_expansion_check(const ModelId& m, Index n, std::uint64_t seed,
                                    double eps = 1e-3);

double covariance_consistency_residual(const Mat& lambda, const CovarianceTriple& t);
double kyle_factor_invariance_residual(const CovarianceTriple& t);
double prop4_residual(const CovarianceTriple& t);
// min_c ||Lambda - c Lambda_kyle||_F / ||Lambda||_F
double distance_to_kyle(const Mat& lambda, const CovarianceTriple& t);
// Slope of eps^2 ||Lambda(q-triple)|| on the ladder; Prop. 2 regularity holds
// empirically when it stays above kSlopeThreshold.
double regularity_slope(const ModelId& m, const TrialConfig& cfg);

// Reference grid: 1 = satisfied. Extra literal variants inherit their base row.
std::optional<std::array<bool, 14>> expected_row(const ModelId& m);
// Cells where the reference grid is not expected to be reproduced.
std::optional<std::string> documented_exception(const ModelId& m, Axiom a);
// Cells where the reference grid contradicts the model definition itself.
std::optional<std::string> known_conflict(const ModelId& m, Axiom a);

struct Discrepancy {
  ModelId model;
  Axiom axiom = Axiom::PI;
  bool expected = false;
  Verdict got = Verdict::Inconclusive;
  bool documented = false;
  std::string reason;
};

struct AxiomReport {
  TrialConfig cfg;
  std::vector<Index> dims;
  std::vector<ModelId> models;
  std::vector<AxiomVerdict> cells;  // row-major: model x kAxioms
  std::vector<Discrepancy> discrepancies;
  std::vector<std::string> meta_failures;
  std::vector<double> regularity;  // per model
  double seconds = 0.0;

  const AxiomVerdict& at(std::size_t model_index, Axiom a) const;
  // True when every discrepancy is a documented exception and meta-checks pass.
  bool matches() const;
};

AxiomReport axiom_matrix(const std::vector<ModelId>& models, const TrialConfig& cfg,
                         std::vector<Index> dims = {});

}  // namespace ximpact
