#include "ximpact/gof.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ximpact/errors.hpp"
#include "ximpact/parallel.hpp"
#include "ximpact/rng.hpp"

namespace ximpact {

namespace {

Vec inverse_sigma(const CovarianceTriple& t) {
  const Vec s = sigma_scale(t);
  if (!(s.maxCoeff() > 0.0)) throw InvalidWeight("all price volatilities are zero");
  Vec r(s.size());
  for (Index i = 0; i < s.size(); ++i) r(i) = s(i) > 0.0 ? 1.0 / s(i) : 0.0;
  return r;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean_finite(const std::vector<double>& v) {
  double s = 0.0;
  int k = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++k;
  }
  return k > 0 ? s / k : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

std::string WeightSpec::name() const {
  switch (kind) {
    case WeightKind::Idio: return "idio";
    case WeightKind::IdioLiteral: return "idio-lit";
    case WeightKind::Global: return "global";
    case WeightKind::Modes: return "modes";
    case WeightKind::Identity: return "identity";
    case WeightKind::Asset: return "asset:" + std::to_string(asset);
    case WeightKind::Custom: return "custom";
  }
  return "?";
}

WeightSpec WeightSpec::parse(const std::string& s) {
  if (s == "idio") return {WeightKind::Idio, 0, {}};
  if (s == "idio-lit") return {WeightKind::IdioLiteral, 0, {}};
  if (s == "global") return {WeightKind::Global, 0, {}};
  if (s == "modes") return {WeightKind::Modes, 0, {}};
  if (s == "identity") return {WeightKind::Identity, 0, {}};
  if (s.rfind("asset:", 0) == 0) {
    const std::string idx = s.substr(6);
    if (!idx.empty() && std::all_of(idx.begin(), idx.end(), ::isdigit))
      return {WeightKind::Asset, static_cast<Index>(std::stoll(idx)), {}};
  }
  throw ValidationError("unknown weight '" + s + "' (expected idio, idio-lit, global, modes, identity or asset:<i>)");
}

Mat weight_matrix(const WeightSpec& w, const CovarianceTriple& t) {
  validate(t);
  const Index n = t.n();
  switch (w.kind) {
    case WeightKind::Idio: return inverse_sigma(t).cwiseAbs2().asDiagonal();
    case WeightKind::IdioLiteral: return inverse_sigma(t).asDiagonal();
    case WeightKind::Global: {
      const Vec s = inverse_sigma(t);
      return s * s.transpose();
    }
    case WeightKind::Modes: {
      inverse_sigma(t);
      const EigDecomp e = sym_eig(t.sigma);
      const Vec f = e.values.cwiseMax(kModesClip).cwiseInverse();
      return sym(e.vectors * f.asDiagonal() * e.vectors.transpose());
    }
    case WeightKind::Identity: return Mat::Identity(n, n);
    case WeightKind::Asset: {
      if (w.asset < 0 || w.asset >= n) throw ShapeError("asset weight index out of range");
      Mat M = Mat::Zero(n, n);
      M(w.asset, w.asset) = 1.0;
      return M;
    }
    case WeightKind::Custom: {
      if (w.custom.rows() != n || w.custom.cols() != n) throw ShapeError("custom weight must be n x n");
      require_symmetric(w.custom);
      sqrt_psd(w.custom);
      if (w.custom.norm() == 0.0) throw InvalidWeight("M = 0");
      return w.custom;
    }
  }
  throw InvalidWeight("unhandled weight kind");
}

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
  else comp_ += (x - t) + sum_;
  sum_ = t;
}

void R2Sums::add(const Mat& pred, const Mat& dp, const Mat& M) {
  if (pred.rows() != dp.rows() || pred.cols() != dp.cols() || M.rows() != dp.cols())
    throw ShapeError("predictions, realizations and weight disagree in shape");
  const Mat E = dp - pred;
  const Vec ne = (E * M).cwiseProduct(E).rowwise().sum();
  const Vec nd = (dp * M).cwiseProduct(dp).rowwise().sum();
  for (Index t = 0; t < dp.rows(); ++t) {
    num.add(ne(t));
    den.add(nd(t));
  }
  samples += dp.rows();
}

void R2Sums::merge(const R2Sums& o) {
  num.add(o.num.value());
  den.add(o.den.value());
  samples += o.samples;
}

double R2Sums::r2() const {
  const double d = den.value();
  if (!(d > 0.0)) throw DegenerateDenominator("sum of dp^T M dp is zero");
  const double r = 1.0 - num.value() / d;
  return r <= kMinusInfinityThreshold ? -std::numeric_limits<double>::infinity() : r;
}

double r2(const Mat& predictions, const Mat& realizations, const Mat& M) {
  if (realizations.rows() < 1) throw ValidationError("need at least one sample");
  if (M.norm() == 0.0) throw InvalidWeight("M = 0");
  R2Sums s;
  s.add(predictions, realizations, M);
  return s.r2();
}

const ScoreAggregate* ScoreReport::find(const ModelId& m, const std::string& weight) const {
  for (const auto& a : aggregates)
    if (a.model == m && a.weight == weight) return &a;
  return nullptr;
}

ScoreReport score_models(const MarketPanel& p, const std::vector<ModelId>& models,
                         const std::vector<WeightSpec>& weights, const Split& split,
                         const ScoreOptions& o) {
  validate(p);
  if (models.empty() || weights.empty()) throw ValidationError("need at least one model and weight");
  ScoreReport rep;
  rep.single_period = split.single_period;
  if (split.single_period) rep.warnings.push_back("single period: in-sample scores only");

  const Index n = p.n();
  const std::size_t nm = models.size(), nw = weights.size();

  // Calibration per directed pair; failures leave the pair unscored.
  std::vector<std::optional<Estimate>> est(split.pairs.size());
  std::vector<std::string> pair_error(split.pairs.size());
  EstimateOptions eo = o.estimate;
  eo.calibration_scales = o.strict_scales;
  for (std::size_t k = 0; k < split.pairs.size(); ++k) {
    try {
      est[k] = estimate_triples(p, split.pairs[k].calibration, split.pairs[k].evaluation, eo);
    } catch (const std::exception& e) {
      pair_error[k] = e.what();
    }
  }

  struct Task {
    std::size_t pair;
    std::size_t day;  // index into pairs[pair].evaluation
  };
  std::vector<Task> tasks;
  for (std::size_t k = 0; k < split.pairs.size(); ++k)
    if (est[k])
      for (std::size_t d = 0; d < split.pairs[k].evaluation.size(); ++d) tasks.push_back({k, d});

  struct TaskResult {
    std::vector<R2Sums> sums;  // model x weight
    std::vector<Vec> asset_num, asset_den;  // per model
    std::vector<std::string> errors;        // per model
  };
  std::vector<TaskResult> results(tasks.size());
  parallel_for(tasks.size(), [&](std::size_t ti) {
    const Task& task = tasks[ti];
    const AssembledTriple& a = est[task.pair]->days[task.day].triple;
    const PanelDay& day = p.days[split.pairs[task.pair].evaluation[task.day]];
    const DaySamples s = day_samples(day);
    const Index k = static_cast<Index>(a.assets.size());
    Mat dp(s.dp.rows(), k), q(s.q.rows(), k);
    for (Index j = 0; j < k; ++j) {
      dp.col(j) = s.dp.col(a.assets[j]);
      q.col(j) = s.q.col(a.assets[j]);
    }
    TaskResult& r = results[ti];
    r.sums.resize(nm * nw);
    r.asset_num.assign(nm, Vec::Zero(n));
    r.asset_den.assign(nm, Vec::Zero(n));
    r.errors.resize(nm);
    std::vector<Mat> Ms(nw);
    std::string weight_error;
    for (std::size_t w = 0; w < nw; ++w) {
      try {
        Ms[w] = weight_matrix(weights[w], a.triple);
      } catch (const std::exception& e) {
        weight_error = e.what();
      }
    }
    for (std::size_t m = 0; m < nm; ++m) {
      try {
        if (!weight_error.empty()) throw InvalidWeight(weight_error);
        const Mat L = impact(models[m], a.triple);
        const Mat pred = q * L.transpose();
        for (std::size_t w = 0; w < nw; ++w) r.sums[m * nw + w].add(pred, dp, Ms[w]);
        if (o.per_asset) {
          const Mat E = dp - pred;
          for (Index j = 0; j < k; ++j) {
            r.asset_num[m](a.assets[j]) += E.col(j).squaredNorm();
            r.asset_den[m](a.assets[j]) += dp.col(j).squaredNorm();
          }
        }
      } catch (const std::exception& e) {
        r.errors[m] = "day " + day.id + ": " + e.what();
      }
    }
  });

  for (std::size_t k = 0; k < split.pairs.size(); ++k) {
    const DirectedPair& pr = split.pairs[k];
    for (std::size_t m = 0; m < nm; ++m) {
      std::vector<R2Sums> sums(nw);
      Vec an = Vec::Zero(n), ad = Vec::Zero(n);
      std::string error = pair_error[k];
      for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        if (tasks[ti].pair != k) continue;
        const TaskResult& r = results[ti];
        if (!r.errors[m].empty() && error.empty()) error = r.errors[m];
        for (std::size_t w = 0; w < nw; ++w) sums[w].merge(r.sums[m * nw + w]);
        an += r.asset_num[m];
        ad += r.asset_den[m];
      }
      for (std::size_t w = 0; w < nw; ++w) {
        ScoreCell c;
        c.model = models[m];
        c.weight = weights[w].name();
        c.from = pr.from;
        c.to = pr.to;
        c.in_sample = pr.in_sample;
        c.samples = sums[w].samples;
        c.error = error;
        if (c.error.empty()) {
          try {
            c.r2 = sums[w].r2();
          } catch (const std::exception& e) {
            c.error = e.what();
          }
        }
        if (o.per_asset && c.error.empty()) {
          c.per_asset_num = an;
          c.per_asset_den = ad;
          c.per_asset.resize(n);
          for (Index i = 0; i < n; ++i)
            c.per_asset(i) = ad(i) > 0.0 ? 1.0 - an(i) / ad(i) : std::numeric_limits<double>::quiet_NaN();
        }
        rep.cells.push_back(std::move(c));
      }
    }
  }

  for (std::size_t m = 0; m < nm; ++m) {
    for (std::size_t w = 0; w < nw; ++w) {
      std::vector<double> in, out;
      for (const auto& c : rep.cells) {
        if (!(c.model == models[m]) || c.weight != weights[w].name() || !c.error.empty()) continue;
        (c.in_sample ? in : out).push_back(c.r2);
      }
      ScoreAggregate a{models[m], weights[w].name()};
      a.r2_in = mean_finite(in);
      a.r2_out = mean_finite(out);
      a.overfit = a.r2_out / a.r2_in;
      rep.aggregates.push_back(a);
    }
  }

  rep.liquidity = Vec::Zero(n);
  Vec counts = Vec::Zero(n);
  for (std::size_t d = 0; d < p.days.size(); ++d) {
    try {
      const DailyScales s = daily_scales(p, d, o.estimate.centered);
      rep.liquidity += s.omega;
      counts.array() += 1.0;
    } catch (const InsufficientData&) {
    }
  }
  rep.liquidity = rep.liquidity.cwiseQuotient(counts.cwiseMax(1.0));
  for (std::size_t k = 0; k < split.pairs.size(); ++k)
    if (!pair_error[k].empty())
      rep.warnings.push_back(split.pairs[k].from + "->" + split.pairs[k].to + ": " + pair_error[k]);
  return rep;
}

LiquidityCurve liquidity_curve(const Vec& per_asset_r2, const Vec& omega, int n_bins) {
  if (per_asset_r2.size() != omega.size() || omega.size() == 0)
    throw ShapeError("per-asset scores and liquidities must have equal, non-zero length");
  if (n_bins < 1) throw ValidationError("n_bins must be >= 1");
  LiquidityCurve c;
  const std::vector<double> w(omega.data(), omega.data() + omega.size());
  c.q10 = quantile(w, 0.1);
  c.q90 = quantile(w, 0.9);
  c.single_asset = omega.size() == 1;
  const int bins = c.single_asset ? 1 : n_bins;
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k) edges.push_back(quantile(w, static_cast<double>(k) / bins));
  std::vector<std::vector<Index>> members(bins);
  for (Index i = 0; i < omega.size(); ++i) {
    const auto b = std::count_if(edges.begin(), edges.end(), [&](double e) { return e < omega(i); });
    members[b].push_back(i);
  }
  for (const auto& m : members) {
    if (m.empty()) continue;
    std::vector<double> ws, rs;
    for (Index i : m) {
      ws.push_back(omega(i));
      rs.push_back(per_asset_r2(i));
    }
    c.centers.push_back(quantile(ws, 0.5));
    c.means.push_back(mean_finite(rs));
    c.counts.push_back(static_cast<Index>(m.size()));
  }
  return c;
}

std::vector<SweepPoint> sweep(const MarketPanel& p, SweepAxis axis, const std::vector<Index>& grid,
                              const std::vector<ModelId>& models, const WeightSpec& weight,
                              SplitMode split, std::uint64_t seed, const ScoreOptions& o) {
  if (grid.empty()) throw ValidationError("sweep grid is empty");
  std::vector<SweepPoint> out;
  const Index N = p.n();
  for (Index g : grid) {
    std::vector<MarketPanel> panels;
    std::string note;
    double value = 0.0;
    if (axis == SweepAxis::Assets) {
      value = static_cast<double>(g);
      if (g < 1 || g > N) {
        note = "skipped: universe size outside [1, " + std::to_string(N) + "]";
      } else {
        const int reps = g == N ? 1 : static_cast<int>((4 * N + g - 1) / g);
        for (int r = 0; r < reps; ++r) {
          Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(r)}));
          std::vector<Index> idx(N);
          std::iota(idx.begin(), idx.end(), 0);
          std::shuffle(idx.begin(), idx.end(), rng);
          idx.resize(g);
          std::sort(idx.begin(), idx.end());
          panels.push_back(select_assets(p, idx));
        }
      }
    } else {
      value = p.delta_t * static_cast<double>(g);
      if (g < 1) {
        note = "skipped: rebin factor must be >= 1";
      } else {
        MarketPanel rb = rebin(p, g);
        const bool short_day = rb.days.size() != p.days.size() ||
                               std::any_of(rb.days.begin(), rb.days.end(),
                                           [](const PanelDay& d) { return d.bins() < kMinBinsPerDay; });
        if (short_day) note = "skipped: fewer than " + std::to_string(kMinBinsPerDay) + " bins per day";
        else panels.push_back(std::move(rb));
      }
    }
    for (const ModelId& m : models) {
      SweepPoint pt;
      pt.value = value;
      pt.model = m;
      pt.note = note;
      pt.repetitions = static_cast<int>(panels.size());
      out.push_back(pt);
    }
    if (panels.empty()) continue;
    std::vector<std::vector<double>> r2s(models.size()), ofs(models.size());
    for (const auto& sub : panels) {
      const ScoreReport rep = score_models(sub, models, {weight}, year_split(sub, split), o);
      for (std::size_t m = 0; m < models.size(); ++m) {
        const ScoreAggregate* a = rep.find(models[m], weight.name());
        r2s[m].push_back(a->r2_out);
        ofs[m].push_back(a->overfit);
      }
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
      SweepPoint& pt = out[out.size() - models.size() + m];
      pt.r2_out = mean_finite(r2s[m]);
      pt.overfit = mean_finite(ofs[m]);
    }
  }
  return out;
}

}  // namespace ximpact
