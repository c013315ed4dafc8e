#include "ximpact/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ximpact/errors.hpp"
#include "ximpact/parallel.hpp"

namespace ximpact {

namespace {

Vec safe_inverse(const Vec& v) {
  Vec r(v.size());
  for (Index i = 0; i < v.size(); ++i) r(i) = v(i) > 0.0 ? 1.0 / v(i) : 0.0;
  return r;
}

// Unit diagonal; rows with zero variance get a 1 on the diagonal.
Mat normalize_unit_diagonal(const Mat& C) {
  Vec d = C.diagonal().cwiseMax(0.0).cwiseSqrt();
  Mat out = safe_inverse(d).asDiagonal() * C * safe_inverse(d).asDiagonal();
  for (Index i = 0; i < out.rows(); ++i) out(i, i) = 1.0;
  return sym(out);
}

Mat clip_correlation(const Mat& C) {
  return normalize_unit_diagonal(clip_psd(normalize_unit_diagonal(C), kCorrelationClip));
}

struct Moments {
  Mat xx, yy, xy;
  Index count = 0;
};

}  // namespace

Index MarketPanel::asset_index(const std::string& name) const {
  auto it = std::find(assets.begin(), assets.end(), name);
  if (it == assets.end()) throw UnknownAsset("'" + name + "'");
  return static_cast<Index>(it - assets.begin());
}

void validate(const MarketPanel& p) {
  if (p.assets.empty()) throw ValidationError("panel has no assets");
  if (!(p.delta_t > 0.0)) throw ValidationError("delta_t must be positive");
  std::set<std::string> seen(p.assets.begin(), p.assets.end());
  if (seen.size() != p.assets.size()) throw ValidationError("duplicate asset names");
  for (const auto& d : p.days) {
    if (d.prices.cols() != p.n() || d.flows.cols() != p.n() || d.flows.rows() != d.bins() ||
        d.missing.rows() != d.bins() || d.missing.cols() != p.n()) {
      throw ValidationError("day " + d.id + ": shape mismatch");
    }
    if (!d.prices.allFinite() || !d.flows.allFinite())
      throw ValidationError("day " + d.id + ": non-finite price or flow");
  }
}

MarketPanel bin_events(const std::vector<Tick>& ticks, const std::vector<std::string>& assets,
                       double delta_t, const SessionWindow& session) {
  if (!(delta_t > 0.0)) throw ValidationError("delta_t must be positive");
  const Index bins = static_cast<Index>(std::floor((session.close - session.open) / delta_t + 1e-9));
  if (bins < 1) throw ValidationError("session shorter than one bin");

  MarketPanel p;
  p.assets = assets;
  p.delta_t = delta_t;
  const Index n = p.n();

  std::vector<std::string> order;
  std::map<std::string, std::vector<const Tick*>> by_day;
  for (const auto& t : ticks) {
    if (!by_day.count(t.day)) order.push_back(t.day);
    by_day[t.day].push_back(&t);
  }

  for (const auto& day : order) {
    PanelDay d;
    d.id = day;
    d.prices = Mat::Constant(bins, n, std::numeric_limits<double>::quiet_NaN());
    d.flows = Mat::Zero(bins, n);
    d.missing = Mask::Constant(bins, n, false);
    Mat close = d.prices;
    std::vector<double> last_time(n, -std::numeric_limits<double>::infinity());
    Index in_session = 0;
    for (const Tick* t : by_day[day]) {
      const Index i = p.asset_index(t->asset);
      if (t->time < last_time[i])
        throw OrderingError("day " + day + ", asset " + t->asset + ": ticks out of time order");
      last_time[i] = t->time;
      if (t->time < session.open || t->time >= session.open + bins * delta_t) continue;
      if (!(t->price > 0.0) || !std::isfinite(t->volume))
        throw ValidationError("day " + day + ": invalid tick for " + t->asset);
      const Index b = static_cast<Index>((t->time - session.open) / delta_t);
      if (std::isnan(d.prices(b, i))) d.prices(b, i) = t->price;
      close(b, i) = t->price;
      d.flows(b, i) += t->volume;
      ++in_session;
    }
    if (in_session == 0) throw EmptySession("day " + day + " has no ticks inside the session");
    for (Index i = 0; i < n; ++i) {
      double last = std::numeric_limits<double>::quiet_NaN();
      Index first = -1;
      for (Index b = 0; b < bins; ++b) {
        if (!std::isnan(d.prices(b, i))) {
          last = close(b, i);
          if (first < 0) first = b;
        } else {
          d.prices(b, i) = last;
        }
      }
      if (first < 0) throw EmptySession("day " + day + ": no ticks for " + assets[i]);
      for (Index b = 0; b < first; ++b) {
        d.prices(b, i) = d.prices(first, i);
        d.missing(b, i) = true;
      }
    }
    p.days.push_back(std::move(d));
  }
  if (p.days.empty()) throw EmptySession("no ticks");
  return p;
}

MarketPanel panel_from_rows(const std::vector<PanelRow>& rows, double delta_t,
                            std::vector<std::string>* warnings) {
  MarketPanel p;
  p.delta_t = delta_t;
  std::vector<std::string> day_order;
  std::map<std::string, std::size_t> asset_pos;
  std::map<std::string, std::vector<const PanelRow*>> by_day;
  for (const auto& r : rows) {
    if (!asset_pos.count(r.asset)) {
      asset_pos[r.asset] = p.assets.size();
      p.assets.push_back(r.asset);
    }
    if (!by_day.count(r.day)) day_order.push_back(r.day);
    by_day[r.day].push_back(&r);
  }
  const Index n = p.n();
  for (const auto& day : day_order) {
    const auto& rs = by_day[day];
    Index bins = 0;
    std::vector<bool> present(n, false);
    for (const PanelRow* r : rs) {
      if (r->bin < 0) throw ValidationError("day " + day + ": negative bin index");
      bins = std::max(bins, r->bin + 1);
      present[asset_pos[r->asset]] = true;
    }
    if (std::find(present.begin(), present.end(), false) != present.end()) {
      if (warnings) warnings->push_back("day " + day + " dropped: some asset has no rows");
      continue;
    }
    PanelDay d;
    d.id = day;
    d.prices = Mat::Constant(bins, n, std::numeric_limits<double>::quiet_NaN());
    d.flows = Mat::Zero(bins, n);
    d.missing = Mask::Constant(bins, n, true);
    for (const PanelRow* r : rs) {
      const Index i = static_cast<Index>(asset_pos[r->asset]);
      if (!d.missing(r->bin, i))
        throw ValidationError("day " + day + ": duplicate row for bin " + std::to_string(r->bin) +
                              ", asset " + r->asset);
      if (!(r->price > 0.0) || !std::isfinite(r->price))
        throw ValidationError("day " + day + ": price must be positive");
      if (!std::isfinite(r->flow)) throw ValidationError("day " + day + ": flow must be finite");
      d.prices(r->bin, i) = r->price;
      d.flows(r->bin, i) = r->flow;
      d.missing(r->bin, i) = false;
    }
    for (Index i = 0; i < n; ++i) {
      Index first = 0;
      while (d.missing(first, i)) ++first;
      for (Index b = 0; b < bins; ++b) {
        if (b < first) d.prices(b, i) = d.prices(first, i);
        else if (d.missing(b, i)) d.prices(b, i) = d.prices(b - 1, i);
      }
    }
    p.days.push_back(std::move(d));
  }
  return p;
}

DaySamples day_samples(const PanelDay& d) {
  const Index n = d.prices.cols();
  std::vector<Index> rows;
  for (Index t = 0; t + 1 < d.bins(); ++t) {
    if (!d.missing.row(t).any() && !d.missing.row(t + 1).any()) rows.push_back(t);
  }
  DaySamples s{Mat(rows.size(), n), Mat(rows.size(), n)};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Index t = rows[k];
    s.dp.row(k) = d.prices.row(t + 1) - d.prices.row(t);
    s.q.row(k) = d.flows.row(t);
  }
  return s;
}

namespace {

DaySamples centered_samples(const PanelDay& d, bool centered) {
  DaySamples s = day_samples(d);
  if (centered && s.dp.rows() > 0) {
    s.dp.rowwise() -= s.dp.colwise().mean();
    s.q.rowwise() -= s.q.colwise().mean();
  }
  return s;
}

DailyScales scales_from(const std::string& id, const DaySamples& s) {
  if (s.dp.rows() == 0) throw InsufficientData("day " + id + " has no complete samples");
  const double N = static_cast<double>(s.dp.rows());
  DailyScales out;
  out.day = id;
  out.sigma = (s.dp.colwise().squaredNorm() / N).cwiseSqrt().transpose();
  out.omega = (s.q.colwise().squaredNorm() / N).cwiseSqrt().transpose();
  for (Index i = 0; i < out.omega.size(); ++i) out.degenerate.push_back(out.omega(i) == 0.0);
  return out;
}

void require_bins(const PanelDay& d) {
  if (d.bins() < kMinBinsPerDay)
    throw InsufficientData("day " + d.id + " has " + std::to_string(d.bins()) + " bins, need " +
                           std::to_string(kMinBinsPerDay));
}

}  // namespace

DailyScales daily_scales(const MarketPanel& p, std::size_t day, bool centered) {
  if (day >= p.days.size()) throw ValidationError("day index out of range");
  require_bins(p.days[day]);
  return scales_from(p.days[day].id, centered_samples(p.days[day], centered));
}

StationaryCorrelations stationary_correlations(const MarketPanel& p,
                                               const std::vector<std::size_t>& days,
                                               bool centered) {
  if (days.size() < 2) throw InsufficientData("need at least 2 calibration days");
  const Index n = p.n();
  std::vector<Moments> per_day(days.size());
  parallel_for(days.size(), [&](std::size_t k) {
    if (days[k] >= p.days.size()) throw ValidationError("day index out of range");
    const PanelDay& d = p.days[days[k]];
    require_bins(d);
    const DaySamples s = centered_samples(d, centered);
    const DailyScales sc = scales_from(d.id, s);
    const Mat x = s.dp * safe_inverse(sc.sigma).asDiagonal();
    const Mat y = s.q * safe_inverse(sc.omega).asDiagonal();
    per_day[k] = {x.transpose() * x, y.transpose() * y, x.transpose() * y, s.dp.rows()};
  });
  Moments m{Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n), 0};
  for (const auto& d : per_day) {
    m.xx += d.xx;
    m.yy += d.yy;
    m.xy += d.xy;
    m.count += d.count;
  }
  const double N = static_cast<double>(m.count);
  StationaryCorrelations c;
  c.samples = m.count;
  const Vec dx = safe_inverse((m.xx.diagonal() / N).cwiseMax(0.0).cwiseSqrt());
  const Vec dy = safe_inverse((m.yy.diagonal() / N).cwiseMax(0.0).cwiseSqrt());
  c.rho = clip_correlation(m.xx / N);
  c.rho_omega = clip_correlation(m.yy / N);
  c.rho_response = dx.asDiagonal() * (m.xy / N) * dy.asDiagonal();
  return c;
}

AssembledTriple assemble_triple(const DailyScales& s, const StationaryCorrelations& c,
                                DropPolicy policy) {
  const Index n = s.sigma.size();
  if (s.omega.size() != n || c.rho.rows() != n || c.rho_omega.rows() != n ||
      c.rho_response.rows() != n || c.rho_response.cols() != n) {
    throw ShapeError("scales and correlations disagree on the number of assets");
  }
  AssembledTriple out;
  for (Index i = 0; i < n; ++i) {
    if (s.omega(i) > 0.0) {
      out.assets.push_back(i);
    } else if (policy == DropPolicy::Error) {
      throw DegenerateLiquidity("asset " + std::to_string(i) + " has zero flow volatility on day " +
                                s.day);
    } else {
      out.warnings.push_back("day " + s.day + ": asset " + std::to_string(i) +
                             " dropped (zero flow volatility)");
    }
  }
  const Index k = static_cast<Index>(out.assets.size());
  Vec sg(k), wg(k);
  Mat rho(k, k), ro(k, k), rr(k, k);
  for (Index a = 0; a < k; ++a) {
    sg(a) = s.sigma(out.assets[a]);
    wg(a) = s.omega(out.assets[a]);
    for (Index b = 0; b < k; ++b) {
      rho(a, b) = c.rho(out.assets[a], out.assets[b]);
      ro(a, b) = c.rho_omega(out.assets[a], out.assets[b]);
      rr(a, b) = c.rho_response(out.assets[a], out.assets[b]);
    }
  }
  out.triple.sigma = sym(sg.asDiagonal() * rho * sg.asDiagonal());
  out.triple.omega = sym(wg.asDiagonal() * ro * wg.asDiagonal());
  out.triple.response = sg.asDiagonal() * rr * wg.asDiagonal();
  return out;
}

TripleScales decompose_triple(const CovarianceTriple& t) {
  validate(t);
  TripleScales s;
  s.sigma = sigma_scale(t);
  s.omega = omega_scale(t);
  const Vec is = safe_inverse(s.sigma), iw = safe_inverse(s.omega);
  s.corr.rho = is.asDiagonal() * t.sigma * is.asDiagonal();
  s.corr.rho_omega = iw.asDiagonal() * t.omega * iw.asDiagonal();
  s.corr.rho_response = is.asDiagonal() * t.response * iw.asDiagonal();
  return s;
}

SpreadSpec SpreadSpec::parse(const std::string& s) {
  const auto a = s.find(':');
  const auto b = a == std::string::npos ? a : s.find(':', a + 1);
  if (b == std::string::npos || s.find(':', b + 1) != std::string::npos)
    throw ValidationError("spread spec must be spread:legplus:legminus, got '" + s + "'");
  SpreadSpec r{s.substr(0, a), s.substr(a + 1, b - a - 1), s.substr(b + 1)};
  if (r.spread.empty() || r.leg_plus.empty() || r.leg_minus.empty())
    throw ValidationError("spread spec has an empty field: '" + s + "'");
  return r;
}

MarketPanel impose_spread_constraint(const MarketPanel& p, const SpreadSpec& s) {
  const Index is = p.asset_index(s.spread);
  const Index ip = p.asset_index(s.leg_plus);
  const Index im = p.asset_index(s.leg_minus);
  MarketPanel out = p;
  for (auto& d : out.days) {
    for (Index b = 1; b < d.bins(); ++b) {
      d.prices(b, is) = d.prices(b - 1, is) + (d.prices(b, ip) - d.prices(b - 1, ip)) -
                        (d.prices(b, im) - d.prices(b - 1, im));
    }
  }
  return out;
}

Vec spread_direction(const MarketPanel& p, const SpreadSpec& s) {
  Vec v = Vec::Zero(p.n());
  v(p.asset_index(s.spread)) = 1.0;
  v(p.asset_index(s.leg_plus)) = -1.0;
  v(p.asset_index(s.leg_minus)) = 1.0;
  return v / std::sqrt(3.0);
}

SplitMode parse_split(const std::string& s) {
  if (s == "prefix") return SplitMode::Prefix;
  if (s == "halves") return SplitMode::Halves;
  if (s == "none") return SplitMode::None;
  throw ValidationError("unknown split '" + s + "' (expected prefix, halves or none)");
}

std::string period_of(const std::string& day_id) { return day_id.substr(0, day_id.find('-')); }

Split year_split(const MarketPanel& p, SplitMode mode) {
  std::vector<std::string> labels;
  std::vector<std::vector<std::size_t>> groups;
  auto add = [&](const std::string& label, std::size_t day) {
    auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      labels.push_back(label);
      groups.push_back({day});
    } else {
      groups[it - labels.begin()].push_back(day);
    }
  };
  const std::size_t nd = p.days.size();
  if (nd == 0) throw InsufficientData("panel has no days");
  for (std::size_t d = 0; d < nd; ++d) {
    switch (mode) {
      case SplitMode::Prefix: add(period_of(p.days[d].id), d); break;
      case SplitMode::Halves:
        if (nd < 2) throw InsufficientData("halves split needs at least 2 days");
        add(d < nd / 2 ? "H1" : "H2", d);
        break;
      case SplitMode::None: add("all", d); break;
    }
  }
  Split s;
  s.single_period = labels.size() < 2;
  for (std::size_t i = 0; i < labels.size(); ++i)
    s.pairs.push_back({labels[i], labels[i], groups[i], groups[i], true});
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (i != j) s.pairs.push_back({labels[i], labels[j], groups[i], groups[j], false});
  return s;
}

Estimate estimate_triples(const MarketPanel& p, const std::vector<std::size_t>& calibration,
                          const std::vector<std::size_t>& targets, const EstimateOptions& o) {
  Estimate e;
  e.corr = stationary_correlations(p, calibration, o.centered);
  std::optional<Vec> v;
  if (o.spread) v = spread_direction(p, *o.spread);
  std::optional<DailyScales> fixed;
  if (o.calibration_scales) {
    fixed = DailyScales{"", Vec::Zero(p.n()), Vec::Zero(p.n()), {}};
    for (std::size_t d : calibration) {
      const DailyScales s = daily_scales(p, d, o.centered);
      fixed->sigma += s.sigma.cwiseAbs2();
      fixed->omega += s.omega.cwiseAbs2();
    }
    const double nd = static_cast<double>(calibration.size());
    fixed->sigma = (fixed->sigma / nd).cwiseSqrt();
    fixed->omega = (fixed->omega / nd).cwiseSqrt();
    for (Index i = 0; i < p.n(); ++i) fixed->degenerate.push_back(fixed->omega(i) == 0.0);
  }
  e.days.resize(targets.size());
  parallel_for(targets.size(), [&](std::size_t k) {
    DailyScales s;
    if (fixed) {
      if (targets[k] >= p.days.size()) throw ValidationError("day index out of range");
      s = *fixed;
      s.day = p.days[targets[k]].id;
    } else {
      s = daily_scales(p, targets[k], o.centered);
    }
    AssembledTriple a = assemble_triple(s, e.corr, o.drop);
    if (v) {
      Vec vk(a.assets.size());
      for (std::size_t i = 0; i < a.assets.size(); ++i) vk(i) = (*v)(a.assets[i]);
      if (std::abs(vk.squaredNorm() - 1.0) < 1e-12) {
        const Mat Pb = Mat::Identity(vk.size(), vk.size()) - vk * vk.transpose();
        a.triple.sigma = sym(Pb * a.triple.sigma * Pb);
        a.triple.response = Pb * a.triple.response;
      } else {
        a.warnings.push_back("day " + s.day + ": spread constraint skipped, a leg was dropped");
      }
    }
    e.days[k] = {s.day, std::move(a)};
  });
  return e;
}

CovarianceTriple sample_triple(const MarketPanel& p, const std::vector<std::size_t>& days) {
  const Index n = p.n();
  CovarianceTriple t{Mat::Zero(n, n), Mat::Zero(n, n), Mat::Zero(n, n)};
  Index count = 0;
  for (std::size_t d : days) {
    if (d >= p.days.size()) throw ValidationError("day index out of range");
    const DaySamples s = day_samples(p.days[d]);
    t.sigma += s.dp.transpose() * s.dp;
    t.omega += s.q.transpose() * s.q;
    t.response += s.dp.transpose() * s.q;
    count += s.dp.rows();
  }
  if (count == 0) throw InsufficientData("no complete samples");
  const double N = static_cast<double>(count);
  t.sigma = sym(t.sigma / N);
  t.omega = sym(t.omega / N);
  t.response /= N;
  return t;
}

MarketPanel rebin(const MarketPanel& p, Index k) {
  if (k < 1) throw ValidationError("rebin factor must be >= 1");
  MarketPanel out;
  out.assets = p.assets;
  out.delta_t = p.delta_t * static_cast<double>(k);
  for (const auto& d : p.days) {
    const Index groups = d.bins() / k;
    if (groups == 0) continue;
    PanelDay g;
    g.id = d.id;
    g.prices.resize(groups, p.n());
    g.flows.resize(groups, p.n());
    g.missing.resize(groups, p.n());
    for (Index b = 0; b < groups; ++b) {
      g.prices.row(b) = d.prices.row(b * k);
      g.flows.row(b) = d.flows.middleRows(b * k, k).colwise().sum();
      g.missing.row(b) = d.missing.middleRows(b * k, k).colwise().any();
    }
    out.days.push_back(std::move(g));
  }
  return out;
}

MarketPanel select_assets(const MarketPanel& p, const std::vector<Index>& assets) {
  MarketPanel out;
  out.delta_t = p.delta_t;
  for (Index a : assets) {
    if (a < 0 || a >= p.n()) throw UnknownAsset("index " + std::to_string(a));
    out.assets.push_back(p.assets[a]);
  }
  for (const auto& d : p.days) {
    PanelDay s;
    s.id = d.id;
    s.prices.resize(d.bins(), assets.size());
    s.flows.resize(d.bins(), assets.size());
    s.missing.resize(d.bins(), assets.size());
    for (std::size_t j = 0; j < assets.size(); ++j) {
      s.prices.col(j) = d.prices.col(assets[j]);
      s.flows.col(j) = d.flows.col(assets[j]);
      s.missing.col(j) = d.missing.col(assets[j]);
    }
    out.days.push_back(std::move(s));
  }
  return out;
}

}  // namespace ximpact
