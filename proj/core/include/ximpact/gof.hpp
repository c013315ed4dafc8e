#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ximpact/estimation.hpp"

namespace ximpact {

enum class WeightKind { Idio, IdioLiteral, Global, Modes, Identity, Asset, Custom };

struct WeightSpec {
  WeightKind kind = WeightKind::Idio;
  Index asset = 0;  // Asset
  Mat custom;       // Custom

  std::string name() const;
  // idio, idio-lit, global, modes, identity, asset:<i>
  static WeightSpec parse(const std::string& s);
};

inline constexpr double kModesClip = 1e-15;
inline constexpr double kMinusInfinityThreshold = -1e6;

// idio: diag(sigma)^-2; idio-lit: diag(sigma)^-1; global: sigma_i^-1 sigma_j^-1;
// modes: inverse of Sigma with eigenvalues clipped at 1e-15; asset: e_i e_i^T.
Mat weight_matrix(const WeightSpec& w, const CovarianceTriple& t);

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct R2Sums {
  CompensatedSum num;  // sum (dp - dp_hat)^T M (dp - dp_hat)
  CompensatedSum den;  // sum dp^T M dp
  Index samples = 0;

  // Rows of dp and pred are bins.
  void add(const Mat& pred, const Mat& dp, const Mat& M);
  void merge(const R2Sums& o);
  // -inf when at or below the sentinel threshold.
  double r2() const;
};

double r2(const Mat& predictions, const Mat& realizations, const Mat& M);

struct ScoreOptions {
  EstimateOptions estimate;
  bool strict_scales = false;  // calibration-period scales at prediction time
  bool per_asset = false;
};

struct ScoreCell {
  ModelId model;
  std::string weight;
  std::string from;
  std::string to;
  bool in_sample = false;
  double r2 = std::numeric_limits<double>::quiet_NaN();
  Index samples = 0;
  std::string error;      // non-empty when the cell could not be scored
  Vec per_asset;          // R2(Pi_i), when requested
  Vec per_asset_num;      // numerator of R2(Pi_i)
  Vec per_asset_den;      // denominator of R2(Pi_i)
};

struct ScoreAggregate {
  ModelId model;
  std::string weight;
  double r2_in = std::numeric_limits<double>::quiet_NaN();
  double r2_out = std::numeric_limits<double>::quiet_NaN();
  double overfit = std::numeric_limits<double>::quiet_NaN();  // r2_out / r2_in
};

struct ScoreReport {
  std::vector<ScoreCell> cells;
  std::vector<ScoreAggregate> aggregates;
  std::vector<std::string> warnings;
  bool single_period = false;
  Vec liquidity;  // mean daily omega per asset over all days

  const ScoreAggregate* find(const ModelId& m, const std::string& weight) const;
};

ScoreReport score_models(const MarketPanel& p, const std::vector<ModelId>& models,
                         const std::vector<WeightSpec>& weights, const Split& split,
                         const ScoreOptions& o = {});

struct LiquidityCurve {
  std::vector<double> centers;  // median omega of each populated bin
  std::vector<double> means;
  std::vector<Index> counts;
  double q10 = 0.0;
  double q90 = 0.0;
  bool single_asset = false;
};

// Quantile bins of omega; empty bins are omitted.
LiquidityCurve liquidity_curve(const Vec& per_asset_r2, const Vec& omega, int n_bins);

enum class SweepAxis { Assets, DeltaT };

struct SweepPoint {
  double value = 0.0;  // universe size or bin length in seconds
  ModelId model;
  double r2_out = std::numeric_limits<double>::quiet_NaN();
  double overfit = std::numeric_limits<double>::quiet_NaN();
  int repetitions = 0;
  std::string note;
};

// Assets axis: grid holds universe sizes, ceil(4 N / size) random subsets per
// point. DeltaT axis: grid holds re-binning factors.
std::vector<SweepPoint> sweep(const MarketPanel& p, SweepAxis axis, const std::vector<Index>& grid,
                              const std::vector<ModelId>& models, const WeightSpec& weight,
                              SplitMode split, std::uint64_t seed, const ScoreOptions& o = {});

}  // namespace ximpact
