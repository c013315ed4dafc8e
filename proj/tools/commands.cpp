#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "ximpact/axioms.hpp"
#include "ximpact/errors.hpp"
#include "ximpact/gof.hpp"
#include "ximpact/simulate.hpp"

namespace ximpact::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kDefaultSeed = 20240601;

const char* kResponseNote =
    "response stationarity: diag(sigma_t)^-1 R_t diag(omega_t)^-1 is assumed stationary, "
    "like the price and flow correlations";
const char* kIdioNote =
    "idio weight is diag(sigma)^-2 so each asset's error is measured in units of its variance; "
    "idio-lit gives the literal diag(sigma)^-1";

std::vector<std::string> names(const std::vector<ModelId>& ms) {
  std::vector<std::string> out;
  for (const auto& m : ms) out.push_back(m.name());
  return out;
}

OptSpec common_seed() { return {"seed", OptType::U64, kDefaultSeed, "master seed"}; }
OptSpec common_out() { return {"out", OptType::Str, ".", "output directory"}; }
OptSpec common_format() {
  return {"format", OptType::Str, "doc", "doc: JSON documents; csv: JSON plus flat CSV tables"};
}
OptSpec panel_dt() {
  return {"panel-delta-t", OptType::Double, 60.0, "bin length of the input panel in seconds"};
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ','))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::string> list_value(const json& v) {
  if (v.is_string()) return split_list(v.get<std::string>());
  return v.get<std::vector<std::string>>();
}

std::vector<ModelId> parse_models(const json& v) {
  std::vector<ModelId> out;
  for (const auto& s : list_value(v)) out.push_back(ModelId::parse(s));
  if (out.empty()) throw ValidationError("no models given");
  return out;
}

std::vector<WeightSpec> parse_weights(const json& v) {
  std::vector<WeightSpec> out;
  for (const auto& s : list_value(v)) out.push_back(WeightSpec::parse(s));
  if (out.empty()) throw ValidationError("no weights given");
  return out;
}

void require_format(const json& cfg) {
  const auto f = cfg["format"].get<std::string>();
  if (f != "doc" && f != "csv") throw ValidationError("format must be doc or csv");
}

void require_key(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null() || (cfg[key].is_string() && cfg[key].get<std::string>().empty()))
    throw ValidationError("missing required input '" + key + "'");
}

void echo_config(const json& cfg, std::ostream& out) {
  json echo = cfg;
  echo.erase("out");
  echo.erase("config");
  out << "config " << config_hash(cfg) << " " << echo.dump() << "\n";
  write_atomic(fs::path(cfg["out"].get<std::string>()) / "config.json", dump(echo));
}

// Panel with the requested bin length and optional spread constraint applied.
MarketPanel load_panel(const json& cfg, std::vector<std::string>& warnings) {
  const double native = cfg["panel-delta-t"].get<double>();
  if (!(native > 0.0)) throw ValidationError("panel-delta-t must be positive");
  MarketPanel p = read_panel(cfg["panel"].get<std::string>(), native, &warnings);
  if (p.days.empty()) throw InputError("panel has no complete days");
  const double target = cfg["delta-t"].get<double>();
  if (target > 0.0 && target != native) {
    const double k = target / native;
    if (std::abs(k - std::round(k)) > 1e-9 || k < 1.0)
      throw ValidationError("delta-t must be a positive multiple of panel-delta-t");
    p = rebin(p, static_cast<Index>(std::llround(k)));
  }
  const auto spread = cfg["spread"].get<std::string>();
  if (!spread.empty()) p = impose_spread_constraint(p, SpreadSpec::parse(spread));
  return p;
}

EstimateOptions estimate_options(const json& cfg) {
  EstimateOptions o;
  o.centered = cfg["centered"].get<bool>();
  o.drop = cfg["strict-liquidity"].get<bool>() ? DropPolicy::Error : DropPolicy::DropAsset;
  const auto spread = cfg["spread"].get<std::string>();
  if (!spread.empty()) o.spread = SpreadSpec::parse(spread);
  return o;
}

json reference_context() {
  const std::vector<std::string> models{"direct", "whitening", "whitening*", "el", "el*", "kyle",
                                        "r-direct", "ml", "r-el", "r-el*", "r-kyle"};
  const std::vector<double> in{0.038, -0.025, 0.059, -0.631, -0.128, 0.343,
                               0.276, 0.373,  0.257, 0.236,  0.239};
  const std::vector<double> out{0.038, -0.031, 0.047, -0.642, -0.133, 0.336,
                                0.274, 0.358,  0.249, 0.227,  0.232};
  json j;
  j["note"] =
      "published scores on proprietary 2016-2017 exchange data (stocks, one-minute bins); "
      "not reproducible here and shown for context only";
  for (std::size_t i = 0; i < models.size(); ++i)
    j["stocks_idio"][models[i]] = {{"r2_in", in[i]}, {"r2_out", out[i]}};
  return j;
}

json r2_json(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  return x;
}

std::string r2_csv(double x) {
  if (std::isnan(x)) return "";
  if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
  return fmt_double(x);
}

SimSpec sim_spec_from_json(const json& s, std::uint64_t seed) {
  if (!s.is_object()) throw InputError("simulation spec must be a JSON object");
  const std::string scenario = s.value("scenario", "custom");
  const int days = s.value("days", 40);
  const Index bins = s.value("bins_per_day", static_cast<Index>(390));
  if (days < 1) throw ValidationError("days must be >= 1");
  if (bins < 2) throw ValidationError("bins_per_day must be >= 2");
  SimSpec spec;
  if (scenario == "crude") {
    spec = make_crude_scenario(seed, days, bins);
  } else if (scenario == "half-noise") {
    spec = make_half_noise_scenario(seed, days, bins);
  } else if (scenario == "correlated") {
    spec = make_correlated_scenario(s.value("n", static_cast<Index>(10)), s.value("min_corr", 0.3), days, bins,
                                    seed, s.value("signal", 0.6));
  } else if (scenario == "custom") {
    for (const char* k : {"lambda", "omega", "noise"})
      if (!s.contains(k)) throw InputError(std::string("custom scenario needs '") + k + "'");
    spec.lambda_true = nested_matrix_from_json(s["lambda"], "lambda");
    spec.omega_true = nested_matrix_from_json(s["omega"], "omega");
    spec.noise_cov = nested_matrix_from_json(s["noise"], "noise");
    spec.n = spec.lambda_true.rows();
    spec.days = days;
    spec.bins_per_day = bins;
    spec.seed = seed;
    if (s.contains("day_scales")) spec.day_scales = nested_matrix_from_json(s["day_scales"], "day_scales");
  } else {
    throw ValidationError("unknown scenario '" + scenario + "' (crude, half-noise, correlated, custom)");
  }
  if (s.contains("assets")) spec.assets = s["assets"].get<std::vector<std::string>>();
  if (s.contains("delta_t")) spec.delta_t = s["delta_t"].get<double>();
  spec.validate();
  return spec;
}

}  // namespace

const std::vector<CommandSpec>& commands() {
  static const std::vector<CommandSpec> cmds{
      {"simulate",
       "simulate a market panel with a known impact matrix",
       {{"spec", OptType::Str, nullptr, "simulation spec (JSON file)", true},
        {"seed", OptType::U64, nullptr, "master seed (default: the spec's seed, else 20240601)"},
        common_out(),
        common_format()}},
      {"estimate",
       "estimate per-day covariance triples from a panel",
       {{"panel", OptType::Str, nullptr, "panel CSV", true},
        {"split", OptType::Str, "prefix", "period split: prefix, halves or none"},
        {"spread", OptType::Str, "", "spread constraint spread:legplus:legminus"},
        panel_dt(),
        {"delta-t", OptType::Double, 0.0, "re-bin to this bin length in seconds (0: native)"},
        {"centered", OptType::Flag, false, "center daily moments"},
        {"strict-liquidity", OptType::Flag, false, "fail instead of dropping assets with zero flow"},
        common_seed(),
        common_out(),
        common_format()}},
      {"axioms",
       "check the axiom grid of impact models",
       {{"models", OptType::List, names(catalogue()), "comma-separated models"},
        {"n", OptType::List, json::array({"2", "3", "4", "6"}), "comma-separated dimensions"},
        {"trials", OptType::Int, 100, "trials per cell"},
        {"tol", OptType::Double, 1e-8, "residual tolerance"},
        common_seed(),
        common_out(),
        common_format()}},
      {"score",
       "score impact models on a panel",
       {{"panel", OptType::Str, nullptr, "panel CSV", true},
        {"models", OptType::List, names(table_models()), "comma-separated models"},
        {"weights", OptType::List, json::array({"idio", "global", "modes"}), "comma-separated weights"},
        {"split", OptType::Str, "prefix", "period split: prefix, halves or none"},
        {"spread", OptType::Str, "", "spread constraint spread:legplus:legminus"},
        panel_dt(),
        {"delta-t", OptType::Double, 0.0, "re-bin to this bin length in seconds (0: native)"},
        {"strict", OptType::Flag, false, "use calibration-period scales at prediction time"},
        {"centered", OptType::Flag, false, "center daily moments"},
        {"strict-liquidity", OptType::Flag, false, "fail instead of dropping assets with zero flow"},
        {"liquidity-bins", OptType::Int, 0, "per-asset liquidity curve with this many bins (0: off)"},
        common_seed(),
        common_out(),
        common_format()}},
      {"cost",
       "expected impact cost of a portfolio",
       {{"triple", OptType::Str, nullptr, "triple document (JSON)", true},
        {"models", OptType::List, json::array({"kyle"}), "comma-separated models"},
        {"portfolio", OptType::Str, nullptr, "portfolio file: JSON array or {\"xi\": [...]}"},
        common_seed(),
        common_out(),
        common_format()}},
  };
  return cmds;
}

json convert_option(const OptSpec& o, const std::string& raw) {
  auto bad = [&] { return ValidationError("--" + o.key + ": invalid value '" + raw + "'"); };
  switch (o.type) {
    case OptType::Str: return raw;
    case OptType::Flag: return raw != "false" && raw != "0";
    case OptType::List: return split_list(raw);
    case OptType::Int: {
      long long v = 0;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size()) throw bad();
      return v;
    }
    case OptType::U64: {
      std::uint64_t v = 0;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size()) throw bad();
      return v;
    }
    case OptType::Double: {
      double v = 0;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size() || !std::isfinite(v)) throw bad();
      return v;
    }
  }
  throw bad();
}

json resolve_config(const CommandSpec& c, const json& file_config, const json& explicit_flags) {
  json r = json::object();
  r["command"] = c.name;
  for (const auto& o : c.options) r[o.key] = o.def;
  if (!file_config.is_null()) {
    if (!file_config.is_object()) throw InputError("config must be a JSON object");
    if (file_config.contains("command") && file_config["command"] != c.name)
      throw ValidationError("config was written for '" + file_config["command"].get<std::string>() + "'");
    for (const auto& [k, v] : file_config.items()) {
      if (k == "command") continue;
      if (!r.contains(k)) throw ValidationError("unknown config key '" + k + "'");
      r[k] = v;
    }
  }
  for (const auto& [k, v] : explicit_flags.items()) r[k] = v;
  return r;
}

std::string config_hash(const json& resolved) {
  json h = resolved;
  h.erase("out");
  h.erase("config");
  return sha256_hex(h.dump());
}

int run_command(const std::string& name, json cfg, std::ostream& out, std::ostream& err) {
  if (name == "simulate") return cmd_simulate(std::move(cfg), out, err);
  if (name == "estimate") return cmd_estimate(std::move(cfg), out, err);
  if (name == "axioms") return cmd_axioms(std::move(cfg), out, err);
  if (name == "score") return cmd_score(std::move(cfg), out, err);
  if (name == "cost") return cmd_cost(std::move(cfg), out, err);
  throw ValidationError("unknown command '" + name + "'");
}

int cmd_simulate(json cfg, std::ostream& out, std::ostream&) {
  require_format(cfg);
  require_key(cfg, "spec");
  if (cfg["spec"].is_string()) cfg["spec"] = read_json(cfg["spec"].get<std::string>());
  const json& s = cfg["spec"];
  if (cfg["seed"].is_null()) cfg["seed"] = s.is_object() ? s.value("seed", kDefaultSeed) : kDefaultSeed;
  const SimSpec spec = sim_spec_from_json(s, cfg["seed"].get<std::uint64_t>());
  const std::string hash = config_hash(cfg);
  const Simulation sim = simulate_panel(spec);

  const fs::path dir = cfg["out"].get<std::string>();
  json gt;
  gt["config_hash"] = hash;
  gt["assets"] = sim.panel.assets;
  gt["lambda_true"] = nested_matrix_to_json(sim.truth.lambda_true);
  gt["omega_true"] = nested_matrix_to_json(sim.truth.omega_true);
  gt["noise_cov"] = nested_matrix_to_json(sim.truth.noise_cov);
  gt["sigma_total"] = nested_matrix_to_json(sim.truth.sigma_total);
  gt["response"] = nested_matrix_to_json(sim.truth.response);
  for (const char* w : {"idio", "global", "modes", "identity"}) {
    try {
      gt["analytic_r2"][w] = analytic_r2(sim.truth, weight_matrix(WeightSpec::parse(w), sim.truth.triple()));
    } catch (const Error& e) {
      gt["analytic_r2"][w] = nullptr;
    }
  }
  write_atomic(dir / "panel.csv", panel_to_csv(sim.panel));
  write_atomic(dir / "ground_truth.json", dump(gt));
  echo_config(cfg, out);
  out << "wrote " << sim.panel.days.size() << " days x " << spec.bins_per_day << " bins x " << spec.n
      << " assets\n";
  return 0;
}

int cmd_estimate(json cfg, std::ostream& out, std::ostream& err) {
  require_format(cfg);
  require_key(cfg, "panel");
  const std::string hash = config_hash(cfg);
  std::vector<std::string> warnings;
  const MarketPanel p = load_panel(cfg, warnings);
  const Split split = year_split(p, parse_split(cfg["split"].get<std::string>()));
  const EstimateOptions opts = estimate_options(cfg);
  const fs::path dir = cfg["out"].get<std::string>();
  const bool csv = cfg["format"] == "csv";

  json summary;
  summary["config_hash"] = hash;
  summary["notes"] = {kResponseNote};
  summary["assets"] = p.assets;
  summary["delta_t"] = p.delta_t;
  std::string table = "period,day,matrix,i,j,value\n";
  for (const auto& pair : split.pairs) {
    if (!pair.in_sample) continue;
    Estimate e;
    try {
      e = estimate_triples(p, pair.calibration, pair.evaluation, opts);
    } catch (const InsufficientData& ex) {
      warnings.push_back("period " + pair.from + " skipped: " + ex.what());
      continue;
    }
    json corr;
    corr["config_hash"] = hash;
    corr["period"] = pair.from;
    corr["assets"] = p.assets;
    corr["samples"] = e.corr.samples;
    corr["rho"] = matrix_to_json(e.corr.rho);
    corr["rho_omega"] = matrix_to_json(e.corr.rho_omega);
    corr["rho_response"] = matrix_to_json(e.corr.rho_response);
    write_atomic(dir / ("correlations-" + pair.from + ".json"), dump(corr));
    json days = json::array();
    for (const auto& d : e.days) {
      std::vector<std::string> assets;
      for (Index i : d.triple.assets) assets.push_back(p.assets[i]);
      json prov{{"period", pair.from}, {"day", d.day}, {"config_hash", hash}};
      write_atomic(dir / "triples" / (d.day + ".json"), dump(triple_to_json(d.triple.triple, assets, prov)));
      for (const auto& w : d.triple.warnings) warnings.push_back(w);
      days.push_back(d.day);
      if (csv) {
        const std::pair<const char*, const Mat*> mats[] = {
            {"sigma", &d.triple.triple.sigma}, {"omega", &d.triple.triple.omega}, {"response", &d.triple.triple.response}};
        for (const auto& [name, M] : mats)
          for (Index i = 0; i < M->rows(); ++i)
            for (Index j = 0; j < M->cols(); ++j)
              table += pair.from + "," + d.day + "," + name + "," + assets[i] + "," + assets[j] + "," +
                       fmt_double((*M)(i, j)) + "\n";
      }
    }
    summary["periods"][pair.from] = days;
  }
  summary["warnings"] = warnings;
  write_atomic(dir / "estimate.json", dump(summary));
  if (csv) write_atomic(dir / "triples.csv", table);
  echo_config(cfg, out);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  if (!summary.contains("periods")) {
    err << "error: no period could be estimated\n";
    return 1;
  }
  return 0;
}

int cmd_axioms(json cfg, std::ostream& out, std::ostream& err) {
  require_format(cfg);
  const std::vector<ModelId> models = parse_models(cfg["models"]);
  TrialConfig tc;
  tc.trials = static_cast<int>(cfg["trials"].get<long long>());
  tc.tol = cfg["tol"].get<double>();
  tc.seed = cfg["seed"].get<std::uint64_t>();
  std::vector<Index> dims;
  for (const auto& s : list_value(cfg["n"])) dims.push_back(convert_option({"n", OptType::Int, nullptr, ""}, s).get<Index>());
  if (dims.empty()) throw ValidationError("no dimensions given");
  tc.n = dims.front();
  for (Index n : dims) {
    TrialConfig c = tc;
    c.n = n;
    c.validate();
  }
  const std::string hash = config_hash(cfg);
  const AxiomReport rep = axiom_matrix(models, tc, dims);

  json doc;
  doc["config_hash"] = hash;
  doc["dims"] = dims;
  doc["trials"] = tc.trials;
  doc["tol"] = tc.tol;
  doc["axioms"] = json::array();
  for (Axiom a : kAxioms) doc["axioms"].push_back(std::string(axiom_name(a)));
  std::string table = "model,axiom,verdict,worst_residual,trial,n,seed,note\n";
  out << "model         ";
  for (Axiom a : kAxioms) out << " " << axiom_name(a);
  out << "\n";
  for (std::size_t m = 0; m < models.size(); ++m) {
    json row;
    row["model"] = models[m].name();
    std::string grid;
    out << models[m].name() << std::string(14 - std::min<std::size_t>(13, models[m].name().size()), ' ');
    for (Axiom a : kAxioms) {
      const AxiomVerdict& v = rep.at(m, a);
      const char mark = v.verdict == Verdict::Satisfied ? '1' : v.verdict == Verdict::Violated ? '0' : '?';
      grid += mark;
      out << std::string(axiom_name(a).size(), ' ') << mark;
      json cell{{"axiom", std::string(axiom_name(a))},
                {"verdict", std::string(verdict_name(v.verdict))},
                {"worst_residual", r2_json(v.worst_residual)},
                {"witness", {{"trial", v.witness.trial}, {"n", v.witness.n}, {"seed", v.witness.seed},
                             {"detail", v.witness.detail}}},
                {"note", v.note}};
      row["cells"].push_back(cell);
      table += models[m].name() + "," + std::string(axiom_name(a)) + "," + std::string(verdict_name(v.verdict)) +
               "," + r2_csv(v.worst_residual) + "," + std::to_string(v.witness.trial) + "," +
               std::to_string(v.witness.n) + "," + std::to_string(v.witness.seed) + ",\"" + v.note + "\"\n";
    }
    out << "\n";
    row["grid"] = grid;
    if (const auto exp = expected_row(models[m])) {
      std::string e;
      for (bool b : *exp) e += b ? '1' : '0';
      row["reference"] = e;
    }
    row["regularity_slope"] = rep.regularity[m];
    doc["models"].push_back(row);
  }
  doc["discrepancies"] = json::array();
  for (const auto& d : rep.discrepancies) {
    doc["discrepancies"].push_back({{"model", d.model.name()},
                                    {"axiom", std::string(axiom_name(d.axiom))},
                                    {"expected", d.expected ? "satisfied" : "violated"},
                                    {"got", std::string(verdict_name(d.got))},
                                    {"documented", d.documented},
                                    {"reason", d.reason}});
  }
  doc["meta_failures"] = rep.meta_failures;
  doc["matches"] = rep.matches();
  const fs::path dir = cfg["out"].get<std::string>();
  write_atomic(dir / "axioms.json", dump(doc));
  if (cfg["format"] == "csv") write_atomic(dir / "axioms.csv", table);
  echo_config(cfg, out);
  err << "axiom grid computed in " << rep.seconds << " s\n";
  if (rep.matches()) return 0;
  for (const auto& d : rep.discrepancies) {
    if (d.documented) continue;
    err << "mismatch: " << d.model.name() << " " << axiom_name(d.axiom) << " expected "
        << (d.expected ? "satisfied" : "violated") << ", got " << verdict_name(d.got);
    if (!d.reason.empty()) err << " (" << d.reason << ")";
    err << "\n";
  }
  for (const auto& s : rep.meta_failures) err << "meta-check failed: " << s << "\n";
  return 1;
}

int cmd_score(json cfg, std::ostream& out, std::ostream& err) {
  require_format(cfg);
  require_key(cfg, "panel");
  const std::vector<ModelId> models = parse_models(cfg["models"]);
  const std::vector<WeightSpec> weights = parse_weights(cfg["weights"]);
  const auto bins = cfg["liquidity-bins"].get<long long>();
  if (bins < 0) throw ValidationError("liquidity-bins must be >= 0");
  const std::string hash = config_hash(cfg);
  std::vector<std::string> warnings;
  const MarketPanel p = load_panel(cfg, warnings);
  const Split split = year_split(p, parse_split(cfg["split"].get<std::string>()));
  ScoreOptions o;
  o.estimate = estimate_options(cfg);
  o.strict_scales = cfg["strict"].get<bool>();
  o.per_asset = bins > 0;
  const ScoreReport rep = score_models(p, models, weights, split, o);
  for (const auto& w : rep.warnings) warnings.push_back(w);

  json doc;
  doc["config_hash"] = hash;
  doc["notes"] = {kResponseNote, kIdioNote};
  doc["assets"] = p.assets;
  doc["delta_t"] = p.delta_t;
  doc["single_period"] = rep.single_period;
  doc["reference_context"] = reference_context();
  std::string cells_csv = "model,weight,from,to,in_sample,r2,samples,error\n";
  std::size_t failed = 0;
  for (const auto& c : rep.cells) {
    json j{{"model", c.model.name()}, {"weight", c.weight}, {"from", c.from},      {"to", c.to},
           {"in_sample", c.in_sample}, {"r2", r2_json(c.r2)}, {"samples", c.samples}};
    if (!c.error.empty()) {
      j["error"] = c.error;
      ++failed;
    }
    doc["cells"].push_back(j);
    cells_csv += c.model.name() + "," + c.weight + "," + c.from + "," + c.to + "," + (c.in_sample ? "1" : "0") + "," +
                 r2_csv(c.r2) + "," + std::to_string(c.samples) + ",\"" + c.error + "\"\n";
  }
  std::string agg_csv = "model,weight,r2_in,r2_out,overfit\n";
  out << "model        weight     r2_in      r2_out\n";
  for (const auto& a : rep.aggregates) {
    doc["aggregates"].push_back({{"model", a.model.name()},
                                 {"weight", a.weight},
                                 {"r2_in", r2_json(a.r2_in)},
                                 {"r2_out", r2_json(a.r2_out)},
                                 {"overfit", r2_json(a.overfit)}});
    agg_csv += a.model.name() + "," + a.weight + "," + r2_csv(a.r2_in) + "," + r2_csv(a.r2_out) + "," +
               r2_csv(a.overfit) + "\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-12s %-10s %-10s %-10s\n", a.model.name().c_str(), a.weight.c_str(),
                  r2_csv(a.r2_in).c_str(), r2_csv(a.r2_out).c_str());
    out << line;
  }
  if (bins > 0) {
    for (const auto& m : models) {
      // Per-asset scores pooled over the out-of-sample pairs (in-sample when there are none).
      Vec num = Vec::Zero(p.n()), den = Vec::Zero(p.n());
      const bool use_out = !rep.single_period;
      for (const auto& c : rep.cells) {
        if (!(c.model == m) || c.weight != weights.front().name() || c.in_sample == use_out || !c.error.empty())
          continue;
        num += c.per_asset_num;
        den += c.per_asset_den;
      }
      Vec r2 = Vec::Constant(p.n(), std::numeric_limits<double>::quiet_NaN());
      for (Index i = 0; i < p.n(); ++i)
        if (den(i) > 0.0) r2(i) = 1.0 - num(i) / den(i);
      const LiquidityCurve lc = liquidity_curve(r2, rep.liquidity, static_cast<int>(bins));
      json j{{"model", m.name()}, {"per_asset_r2", json::array()}, {"omega", vector_to_json(rep.liquidity)},
             {"centers", lc.centers}, {"means", json::array()}, {"counts", lc.counts},
             {"omega_q10", lc.q10}, {"omega_q90", lc.q90}, {"single_asset", lc.single_asset}};
      for (Index i = 0; i < r2.size(); ++i) j["per_asset_r2"].push_back(r2_json(r2(i)));
      for (double v : lc.means) j["means"].push_back(r2_json(v));
      doc["liquidity_curves"].push_back(j);
    }
  }
  doc["warnings"] = warnings;
  const fs::path dir = cfg["out"].get<std::string>();
  write_atomic(dir / "score.json", dump(doc));
  if (cfg["format"] == "csv") {
    write_atomic(dir / "score_cells.csv", cells_csv);
    write_atomic(dir / "score.csv", agg_csv);
  }
  echo_config(cfg, out);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  if (failed == rep.cells.size()) {
    err << "error: every score cell failed\n";
    return 1;
  }
  return 0;
}

int cmd_cost(json cfg, std::ostream& out, std::ostream&) {
  require_format(cfg);
  require_key(cfg, "triple");
  require_key(cfg, "portfolio");
  const std::vector<ModelId> models = parse_models(cfg["models"]);
  const std::string hash = config_hash(cfg);
  std::vector<std::string> assets;
  const CovarianceTriple t = triple_from_json(read_json(cfg["triple"].get<std::string>()), &assets);
  json pj = read_json(cfg["portfolio"].get<std::string>());
  if (pj.is_object() && pj.contains("xi")) pj = pj["xi"];
  if (!pj.is_array()) throw InputError("portfolio must be a JSON array or {\"xi\": [...]}");
  Vec xi(pj.size());
  for (std::size_t i = 0; i < pj.size(); ++i) {
    if (!pj[i].is_number()) throw InputError("portfolio entries must be numbers");
    xi(i) = pj[i].get<double>();
  }
  if (xi.size() != t.n())
    throw ShapeError("portfolio has " + std::to_string(xi.size()) + " entries, triple has n = " + std::to_string(t.n()));
  const fs::path dir = cfg["out"].get<std::string>();
  json doc;
  doc["config_hash"] = hash;
  doc["xi"] = vector_to_json(xi);
  for (const auto& m : models) {
    const Mat L = impact(m, t);
    const double c = expected_cost(L, xi);
    out << "cost " << m.name() << " " << fmt_double(c) << "\n";
    doc["models"].push_back({{"model", m.name()}, {"cost", c}, {"lambda", matrix_to_json(L)}, {"n", t.n()}});
  }
  write_atomic(dir / "cost.json", dump(doc));
  echo_config(cfg, out);
  return 0;
}

}  // namespace ximpact::cli
