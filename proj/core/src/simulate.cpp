#include "ximpact/simulate.hpp"

#include <cmath>
#include <cstdio>

#include "ximpact/errors.hpp"
#include "ximpact/parallel.hpp"
#include "ximpact/rng.hpp"

namespace ximpact {

namespace {

std::string day_label(const char* period, int d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04d", period, d);
  return buf;
}

}  // namespace

void SimSpec::validate() const {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (days < 1) throw ValidationError("days must be >= 1");
  if (bins_per_day < 2) throw ValidationError("bins_per_day must be >= 2");
  if (!(delta_t > 0.0)) throw ValidationError("delta_t must be positive");
  auto square = [&](const Mat& M, const char* what) {
    if (M.rows() != n || M.cols() != n) throw ShapeError(std::string(what) + " must be n x n");
    if (!M.allFinite()) throw ValidationError(std::string(what) + " must be finite");
  };
  square(lambda_true, "lambda_true");
  square(omega_true, "omega_true");
  square(noise_cov, "noise_cov");
  require_symmetric(omega_true);
  require_symmetric(noise_cov);
  sqrt_psd(noise_cov);
  if (sym_eig(omega_true).values(n - 1) <= 0.0) throw NotPD("omega_true must be positive definite");
  if (day_scales.size() > 0) {
    if (day_scales.rows() != days || day_scales.cols() != n)
      throw ShapeError("day_scales must be days x n");
    if (!(day_scales.array() > 0.0).all() || !day_scales.allFinite())
      throw ValidationError("day multipliers must be positive");
  }
  if (!assets.empty() && static_cast<Index>(assets.size()) != n)
    throw ShapeError("assets must name n assets");
  if (!day_ids.empty() && static_cast<int>(day_ids.size()) != days)
    throw ShapeError("day_ids must name every day");
}

GroundTruth ground_truth(const SimSpec& s) {
  GroundTruth g;
  g.lambda_true = s.lambda_true;
  g.omega_true = s.omega_true;
  g.noise_cov = s.noise_cov;
  g.sigma_total = sym(s.lambda_true * s.omega_true * s.lambda_true.transpose() + s.noise_cov);
  g.response = s.lambda_true * s.omega_true;
  return g;
}

Simulation simulate_panel(const SimSpec& s) {
  s.validate();
  Simulation out;
  out.truth = ground_truth(s);
  MarketPanel& p = out.panel;
  p.delta_t = s.delta_t;
  for (Index i = 0; i < s.n; ++i)
    p.assets.push_back(s.assets.empty() ? "A" + std::to_string(i) : s.assets[i]);

  const Mat Aq = sqrt_psd(s.omega_true);
  const Mat An = sqrt_psd(s.noise_cov);
  const double max_scale = s.day_scales.size() > 0 ? s.day_scales.maxCoeff() : 1.0;
  const double vol = std::sqrt(out.truth.sigma_total.diagonal().maxCoeff()) * max_scale;
  const double start = std::max(100.0, 20.0 * vol * std::sqrt(static_cast<double>(s.bins_per_day)));
  const Index B = s.bins_per_day;

  p.days.resize(s.days);
  parallel_for(static_cast<std::size_t>(s.days), [&](std::size_t d) {
    Rng rng(derive_seed(s.seed, {static_cast<std::uint64_t>(d)}));
    std::normal_distribution<double> g(0.0, 1.0);
    const Vec m = s.day_scales.size() > 0 ? Vec(s.day_scales.row(d).transpose()) : Vec::Ones(s.n);
    PanelDay& day = p.days[d];
    day.id = s.day_ids.empty() ? day_label("P1", static_cast<int>(d)) : s.day_ids[d];
    day.prices.resize(B, s.n);
    day.flows.resize(B, s.n);
    day.missing = Mask::Constant(B, s.n, false);
    day.prices.row(0).setConstant(start);
    Vec z(s.n), e(s.n);
    for (Index t = 0; t < B; ++t) {
      for (Index i = 0; i < s.n; ++i) z(i) = g(rng);
      for (Index i = 0; i < s.n; ++i) e(i) = g(rng);
      const Vec q0 = Aq * z;
      day.flows.row(t) = m.cwiseProduct(q0).transpose();
      if (t + 1 < B) {
        const Vec dp = m.cwiseProduct(s.lambda_true * q0 + An * e);
        day.prices.row(t + 1) = day.prices.row(t) + dp.transpose();
      }
    }
  });
  return out;
}

double analytic_r2(const GroundTruth& gt, const Mat& M) {
  if (M.rows() != gt.sigma_total.rows() || M.cols() != gt.sigma_total.cols())
    throw ShapeError("weight matrix dimension mismatch");
  if (M.norm() == 0.0) throw InvalidWeight("M = 0");
  const double den = (M * gt.sigma_total).trace();
  if (den == 0.0) throw DegenerateDenominator("tr(M Sigma) = 0");
  return 1.0 - (M * gt.noise_cov).trace() / den;
}

SpreadSpec crude_spread() { return {"S", "C1", "C0"}; }

SimSpec make_crude_scenario(std::uint64_t seed, int days, Index bins_per_day) {
  Mat legs(2, 2);
  legs << 1.0, 0.99, 0.99, 1.0;
  Mat A(3, 2);
  A << 1, 0, 0, 1, -1, 1;
  const Mat sigma = sym(A * legs * A.transpose());
  Mat omega(3, 3);
  omega << 1.0, 0.5, 0.0, 0.5, 1.0, 0.0, 0.0, 0.0, 1e-4;
  const double a2 = 0.5;

  SimSpec s;
  s.n = 3;
  s.lambda_true = std::sqrt(a2) * kyle(sigma, omega);
  s.omega_true = omega;
  s.noise_cov = (1.0 - a2) * sigma;
  s.days = days;
  s.bins_per_day = bins_per_day;
  s.seed = seed;
  s.assets = {"C0", "C1", "S"};
  return s;
}

SimSpec make_half_noise_scenario(std::uint64_t seed, int days, Index bins_per_day) {
  SimSpec s;
  s.n = 2;
  Vec d(2);
  d << 2.0, 1.0;
  s.lambda_true = d.asDiagonal();
  s.omega_true = Mat::Identity(2, 2);
  s.noise_cov = s.lambda_true * s.lambda_true.transpose();
  s.days = days;
  s.bins_per_day = bins_per_day;
  s.seed = seed;
  return s;
}

SimSpec make_correlated_scenario(Index n, double min_corr, int days, Index bins_per_day,
                                 std::uint64_t seed, double signal) {
  if (n < 1) throw ValidationError("n must be >= 1");
  if (!(min_corr >= 0.0 && min_corr + 0.3 < 1.0)) throw ValidationError("min_corr must lie in [0, 0.7)");
  if (!(signal > 0.0 && signal <= 1.0)) throw ValidationError("signal must lie in (0, 1]");
  Rng rng(derive_seed(seed, {0x736365}));
  std::uniform_real_distribution<double> u(0.0, 1.0);

  Vec b(n), sg(n), fb(n), wg(n);
  for (Index i = 0; i < n; ++i) {
    b(i) = std::sqrt(min_corr + 0.3 * u(rng));
    sg(i) = 0.5 + 1.5 * u(rng);
    fb(i) = 0.2 + 0.4 * u(rng);
    wg(i) = std::exp(std::log(0.2) + std::log(25.0) * u(rng));
  }
  Mat rho = b * b.transpose();
  rho.diagonal().setOnes();
  Mat rho_q = fb * fb.transpose();
  rho_q.diagonal().setOnes();
  const Mat sigma = sym(sg.asDiagonal() * rho * sg.asDiagonal());
  const Mat omega = sym(wg.asDiagonal() * rho_q * wg.asDiagonal());

  SimSpec s;
  s.n = n;
  s.lambda_true = std::sqrt(signal) * kyle(sigma, omega);
  s.omega_true = omega;
  s.noise_cov = (1.0 - signal) * sigma;
  s.days = days;
  s.bins_per_day = bins_per_day;
  s.seed = seed;
  s.day_scales.resize(days, n);
  for (int d = 0; d < days; ++d)
    for (Index i = 0; i < n; ++i) s.day_scales(d, i) = 0.7 + 0.7 * u(rng);
  for (int d = 0; d < days; ++d) s.day_ids.push_back(day_label(d < days / 2 ? "P1" : "P2", d));
  return s;
}

}  // namespace ximpact
