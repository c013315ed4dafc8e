#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ximpact/estimation.hpp"

namespace ximpact::cli {

using json = nlohmann::json;

// Schema or content problem in an input file; maps to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kPanelHeader = "day,bin_index,asset,price,flow";

// Missing bins are not written; reading restores them as missing.
std::string panel_to_csv(const MarketPanel& p);
MarketPanel panel_from_csv(const std::string& text, double delta_t,
                           std::vector<std::string>* warnings = nullptr);
MarketPanel read_panel(const std::filesystem::path& path, double delta_t,
                       std::vector<std::string>* warnings = nullptr);

json matrix_to_json(const Mat& M);  // row-major flat array
Mat matrix_from_json(const json& j, Index rows, Index cols, const std::string& what);
json nested_matrix_to_json(const Mat& M);
Mat nested_matrix_from_json(const json& j, const std::string& what);
json vector_to_json(const Vec& v);

json triple_to_json(const CovarianceTriple& t, const std::vector<std::string>& assets,
                    const json& provenance);
CovarianceTriple triple_from_json(const json& j, std::vector<std::string>* assets = nullptr);

std::string read_text(const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);
// Writes to a temporary sibling, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string dump(const json& j);  // indented, trailing newline

std::string sha256_hex(const std::string& data);

// %.17g, which round-trips every double.
std::string fmt_double(double x);

}  // namespace ximpact::cli
