#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ximpact/models.hpp"

namespace ximpact {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct PanelDay {
  std::string id;
  Mat prices;    // bins x assets, opening price of each bin
  Mat flows;     // bins x assets, net signed flow during the bin
  Mask missing;  // bins x assets; missing bins carry a forward-filled price and zero flow

  Index bins() const { return prices.rows(); }
};

struct MarketPanel {
  std::vector<std::string> assets;
  std::vector<PanelDay> days;
  double delta_t = 60.0;  // seconds

  Index n() const { return static_cast<Index>(assets.size()); }
  Index asset_index(const std::string& name) const;  // UnknownAsset if absent
};

// Shapes and finiteness. Positive prices are required of raw inputs only: an
// imposed spread series may cross zero.
void validate(const MarketPanel& p);

struct Tick {
  std::string day;
  std::string asset;
  double time = 0.0;    // seconds since midnight
  double price = 0.0;   // mid-price
  double volume = 0.0;  // signed: buys positive
};

struct SessionWindow {
  double open = 9.5 * 3600;
  double close = 15.5 * 3600;
};

// Days appear in order of first occurrence. A bin's price is the first tick in
// it, otherwise the last known price; bins before an asset's first tick of the
// day are back-filled and marked missing.
MarketPanel bin_events(const std::vector<Tick>& ticks, const std::vector<std::string>& assets,
                       double delta_t, const SessionWindow& session);

struct PanelRow {
  std::string day;
  Index bin = 0;
  std::string asset;
  double price = 0.0;
  double flow = 0.0;
};

// Long-format rows to a panel. Absent (day, bin, asset) rows become missing
// bins; a day on which some asset has no rows at all is dropped and reported.
MarketPanel panel_from_rows(const std::vector<PanelRow>& rows, double delta_t,
                            std::vector<std::string>* warnings = nullptr);

inline constexpr Index kMinBinsPerDay = 30;
inline constexpr double kCorrelationClip = 1e-15;

// Per-day samples (dp_t = p_{t+1} - p_t, q_t); rows touching a missing bin are
// excluded.
struct DaySamples {
  Mat dp;
  Mat q;
};
DaySamples day_samples(const PanelDay& d);

struct DailyScales {
  std::string day;
  Vec sigma;
  Vec omega;
  std::vector<bool> degenerate;  // omega_i == 0
};

DailyScales daily_scales(const MarketPanel& p, std::size_t day, bool centered = false);

struct StationaryCorrelations {
  Mat rho;
  Mat rho_omega;
  Mat rho_response;  // diag(sigma)^-1 R diag(omega)^-1, pooled
  Index samples = 0;
};

StationaryCorrelations stationary_correlations(const MarketPanel& p,
                                               const std::vector<std::size_t>& days,
                                               bool centered = false);

enum class DropPolicy { DropAsset, Error };

struct AssembledTriple {
  CovarianceTriple triple;
  std::vector<Index> assets;  // panel indices kept
  std::vector<std::string> warnings;
};

AssembledTriple assemble_triple(const DailyScales& s, const StationaryCorrelations& c,
                                DropPolicy policy = DropPolicy::DropAsset);

// Inverse of assemble_triple on the diagonal scales.
struct TripleScales {
  Vec sigma;
  Vec omega;
  StationaryCorrelations corr;
};
TripleScales decompose_triple(const CovarianceTriple& t);

struct SpreadSpec {
  std::string spread;
  std::string leg_plus;
  std::string leg_minus;

  static SpreadSpec parse(const std::string& s);  // "spread:legplus:legminus"
};

MarketPanel impose_spread_constraint(const MarketPanel& p, const SpreadSpec& s);
// Unit vector v with v^T dp = 0 for constrained panels: +1 on the spread,
// -1 on leg_plus, +1 on leg_minus.
Vec spread_direction(const MarketPanel& p, const SpreadSpec& s);

enum class SplitMode { Prefix, Halves, None };
SplitMode parse_split(const std::string& s);

// Period label of a day id: the text before the first '-'.
std::string period_of(const std::string& day_id);

struct DirectedPair {
  std::string from;
  std::string to;
  std::vector<std::size_t> calibration;
  std::vector<std::size_t> evaluation;
  bool in_sample = false;
};

struct Split {
  std::vector<DirectedPair> pairs;  // in-sample pairs first, then out-of-sample
  bool single_period = false;
};

Split year_split(const MarketPanel& p, SplitMode mode = SplitMode::Prefix);

struct EstimateOptions {
  bool centered = false;
  DropPolicy drop = DropPolicy::DropAsset;
  std::optional<SpreadSpec> spread;  // also projects Sigma_t and R_t off the spread direction
  bool calibration_scales = false;   // RMS calibration-day scales for every target day
};

struct DayTriple {
  std::string day;
  AssembledTriple triple;
};

struct Estimate {
  StationaryCorrelations corr;
  std::vector<DayTriple> days;
};

// Correlations from the calibration days, one triple per target day.
Estimate estimate_triples(const MarketPanel& p, const std::vector<std::size_t>& calibration,
                          const std::vector<std::size_t>& targets, const EstimateOptions& o = {});

// Plain pooled uncentered moments over the given days, no rescaling.
CovarianceTriple sample_triple(const MarketPanel& p, const std::vector<std::size_t>& days);

// Aggregates k consecutive bins: opening price of the group, summed flow.
MarketPanel rebin(const MarketPanel& p, Index k);
MarketPanel select_assets(const MarketPanel& p, const std::vector<Index>& assets);

}  // namespace ximpact
