#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "commands.hpp"
#include "ximpact/errors.hpp"

using namespace ximpact;
using namespace ximpact::cli;
namespace fs = std::filesystem;

namespace {

const CommandSpec& spec(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return c;
  throw std::logic_error(name);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ximpact_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) { return WEXITSTATUS(std::system((std::string(XIMPACT_EXE) + " " + args + " >/dev/null 2>&1").c_str())); }

}  // namespace

TEST(Config, PrecedenceDefaultsFileFlags) {
  const json file{{"trials", 7}, {"tol", 1e-6}};
  const json flags{{"trials", 9}};
  const json r = resolve_config(spec("axioms"), file, flags);
  EXPECT_EQ(r["trials"], 9);
  EXPECT_EQ(r["tol"], 1e-6);
  EXPECT_EQ(r["seed"], 20240601);
  EXPECT_THROW(resolve_config(spec("axioms"), json{{"bogus", 1}}, json::object()), ValidationError);
}

TEST(Config, HashIgnoresOutput) {
  json a = resolve_config(spec("axioms"), nullptr, json{{"out", "x"}});
  json b = resolve_config(spec("axioms"), nullptr, json{{"out", "y"}});
  EXPECT_EQ(config_hash(a), config_hash(b));
  b["trials"] = 3;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Options, Conversion) {
  OptSpec i{"n", OptType::Int, nullptr, ""};
  EXPECT_EQ(convert_option(i, "12"), 12);
  EXPECT_THROW(convert_option(i, "1x"), ValidationError);
  OptSpec l{"models", OptType::List, nullptr, ""};
  EXPECT_EQ(convert_option(l, "kyle,ml"), json::array({"kyle", "ml"}));
  OptSpec d{"tol", OptType::Double, nullptr, ""};
  EXPECT_EQ(convert_option(d, "1e-8"), 1e-8);
  EXPECT_THROW(convert_option(d, "nan"), ValidationError);
}

TEST(Io, PanelCsvRoundTrip) {
  MarketPanel p;
  p.assets = {"A", "B"};
  PanelDay d;
  d.id = "P1-0";
  d.prices = Mat::Constant(35, 2, 10.0);
  d.flows = Mat::Constant(35, 2, 0.25);
  d.prices(3, 1) = 1.0 / 3.0;
  d.missing = Mask::Constant(35, 2, false);
  p.days.push_back(d);
  const MarketPanel q = panel_from_csv(panel_to_csv(p), 60.0);
  EXPECT_EQ(q.assets, p.assets);
  EXPECT_EQ(q.days[0].prices, d.prices);
  EXPECT_EQ(q.days[0].flows, d.flows);
  EXPECT_THROW(panel_from_csv("day,bin_index,asset,price,flow\nP1-0,0,A,-1,0\n", 60.0), InputError);
  EXPECT_THROW(panel_from_csv("wrong\n", 60.0), InputError);
}

TEST(Io, TripleJsonRoundTrip) {
  CovarianceTriple t{Mat::Identity(2, 2), 2.0 * Mat::Identity(2, 2), Mat::Zero(2, 2)};
  t.response(0, 1) = 0.1;
  std::vector<std::string> assets;
  const CovarianceTriple u = triple_from_json(triple_to_json(t, {"A", "B"}, json::object()), &assets);
  EXPECT_EQ(u.sigma, t.sigma);
  EXPECT_EQ(u.response, t.response);
  EXPECT_EQ(assets, (std::vector<std::string>{"A", "B"}));
}

TEST(Io, Sha256) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cost, KyleDiagonalExample) {
  const fs::path dir = fresh_dir("cost");
  const CovarianceTriple t{Eigen::Vector2d(4, 1).asDiagonal(), Mat::Identity(2, 2), Mat::Zero(2, 2)};
  write_atomic(dir / "t.json", dump(triple_to_json(t, {"A", "B"}, json::object())));
  write_atomic(dir / "xi.json", "[1, 1]");
  write_atomic(dir / "zero.json", "{\"xi\": [0, 0]}");
  json cfg = resolve_config(spec("cost"), nullptr,
                            json{{"triple", (dir / "t.json").string()}, {"portfolio", (dir / "xi.json").string()},
                                 {"out", dir.string()}});
  std::ostringstream out, err;
  EXPECT_EQ(cmd_cost(cfg, out, err), 0);
  EXPECT_NE(out.str().find("cost kyle 3\n"), std::string::npos);
  cfg["portfolio"] = (dir / "zero.json").string();
  out.str("");
  EXPECT_EQ(cmd_cost(cfg, out, err), 0);
  EXPECT_NE(out.str().find("cost kyle 0\n"), std::string::npos);
}

TEST(Exe, ExitCodes) {
  const fs::path dir = fresh_dir("exe");
  write_atomic(dir / "zero.json", R"({"scenario": "half-noise", "days": 0})");
  EXPECT_EQ(run("simulate " + (dir / "zero.json").string() + " --out " + (dir / "z").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "z" / "panel.csv"));
  write_atomic(dir / "ok.json", R"({"scenario": "half-noise", "days": 4, "bins_per_day": 60})");
  EXPECT_EQ(run("simulate " + (dir / "ok.json").string() + " --out " + (dir / "s").string()), 0);
  const std::string panel = (dir / "s" / "panel.csv").string();
  EXPECT_EQ(run("score " + panel + " --weights bogus --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run("score " + panel + " --weights idio --out " + (dir / "x").string()), 0);
  EXPECT_EQ(run("axioms --models kyle --n 3 --trials 5 --tol 1e-30 --out " + (dir / "a").string()), 1);
  EXPECT_EQ(run("axioms --models kyle --n 3 --trials 5 --out " + (dir / "a").string()), 0);
  EXPECT_EQ(run("nonsense"), 2);
  EXPECT_EQ(run("--help"), 0);
}
