#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ximpact/estimation.hpp"

namespace ximpact {

struct SimSpec {
  Index n = 0;
  Mat lambda_true;
  Mat omega_true;
  Mat noise_cov;
  int days = 0;
  Index bins_per_day = 0;
  Mat day_scales;  // days x n multipliers on sigma and omega; empty means 1
  std::uint64_t seed = 0;
  double delta_t = 60.0;
  std::vector<std::string> assets;  // empty: A0, A1, ...
  std::vector<std::string> day_ids;  // empty: P1-0000, P1-0001, ...

  void validate() const;
};

struct GroundTruth {
  Mat lambda_true;
  Mat omega_true;
  Mat noise_cov;
  Mat sigma_total;  // Lambda Omega Lambda^T + noise
  Mat response;     // Lambda Omega

  CovarianceTriple triple() const { return {sigma_total, omega_true, response}; }
};

GroundTruth ground_truth(const SimSpec& s);

struct Simulation {
  MarketPanel panel;
  GroundTruth truth;
};

// Per bin q = D q0, dp = D (Lambda q0 + eta0) with D the day multipliers,
// q0 ~ N(0, Omega), eta0 ~ N(0, noise). Prices restart each day.
Simulation simulate_panel(const SimSpec& s);

// 1 - tr(M noise) / tr(M sigma_total).
double analytic_r2(const GroundTruth& gt, const Mat& M);

// Legs C0, C1 (correlation 0.99) and the spread S = C1 - C0 exactly; spread
// flow volatility is 1% of the legs'. Lambda_true = a kyle(Sigma, Omega) with
// noise (1 - a^2) Sigma, so the total covariance equals Sigma.
SimSpec make_crude_scenario(std::uint64_t seed, int days = 40, Index bins_per_day = 390);
SpreadSpec crude_spread();

// Lambda = diag(2, 1), Omega = I, noise = Lambda Omega Lambda^T.
SimSpec make_half_noise_scenario(std::uint64_t seed, int days, Index bins_per_day);

// One-factor price correlations in [min_corr, min_corr + 0.3], heterogeneous
// and correlated flows, Lambda = a kyle(Sigma, Omega), noise (1 - a^2) Sigma.
// Day ids split into two periods P1 and P2.
SimSpec make_correlated_scenario(Index n, double min_corr, int days, Index bins_per_day,
                                 std::uint64_t seed, double signal = 0.6);

}  // namespace ximpact
