#include "io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ximpact/errors.hpp"

namespace ximpact::cli {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
T parse_number(std::string_view s, std::size_t line, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InputError("line " + std::to_string(line) + ": invalid " + what + " '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string panel_to_csv(const MarketPanel& p) {
  std::string out = std::string(kPanelHeader) + "\n";
  for (const auto& d : p.days) {
    for (Index b = 0; b < d.bins(); ++b) {
      for (Index i = 0; i < p.n(); ++i) {
        if (d.missing(b, i)) continue;
        out += d.id + "," + std::to_string(b) + "," + p.assets[i] + "," + fmt_double(d.prices(b, i)) +
               "," + fmt_double(d.flows(b, i)) + "\n";
      }
    }
  }
  return out;
}

MarketPanel panel_from_csv(const std::string& text, double delta_t, std::vector<std::string>* warnings) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw InputError("line 1: empty panel file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPanelHeader)
    throw InputError("line 1: expected header '" + std::string(kPanelHeader) + "'");
  std::vector<PanelRow> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 5)
      throw InputError("line " + std::to_string(lineno) + ": expected 5 fields, got " + std::to_string(f.size()));
    if (f[0].empty() || f[2].empty())
      throw InputError("line " + std::to_string(lineno) + ": empty day or asset");
    PanelRow r;
    r.day = std::string(f[0]);
    r.bin = parse_number<long long>(f[1], lineno, "bin_index");
    r.asset = std::string(f[2]);
    r.price = parse_number<double>(f[3], lineno, "price");
    r.flow = parse_number<double>(f[4], lineno, "flow");
    if (r.bin < 0) throw InputError("line " + std::to_string(lineno) + ": negative bin_index");
    if (!(r.price > 0.0) || !std::isfinite(r.price))
      throw InputError("line " + std::to_string(lineno) + ": price must be positive");
    if (!std::isfinite(r.flow)) throw InputError("line " + std::to_string(lineno) + ": flow must be finite");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw InputError("panel has no data rows");
  try {
    return panel_from_rows(rows, delta_t, warnings);
  } catch (const ValidationError& e) {
    throw InputError(e.what());
  }
}

MarketPanel read_panel(const std::filesystem::path& path, double delta_t, std::vector<std::string>* warnings) {
  return panel_from_csv(read_text(path), delta_t, warnings);
}

json matrix_to_json(const Mat& M) {
  json a = json::array();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) a.push_back(M(i, j));
  return a;
}

Mat matrix_from_json(const json& j, Index rows, Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows * cols)
    throw InputError(what + ": expected " + std::to_string(rows * cols) + " numbers");
  Mat M(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index c = 0; c < cols; ++c) {
      const json& v = j[i * cols + c];
      if (!v.is_number()) throw InputError(what + ": non-numeric entry");
      M(i, c) = v.get<double>();
    }
  return M;
}

json nested_matrix_to_json(const Mat& M) {
  json a = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    a.push_back(row);
  }
  return a;
}

Mat nested_matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InputError(what + ": expected an array of rows");
  const Index rows = static_cast<Index>(j.size()), cols = static_cast<Index>(j[0].size());
  Mat M(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Index>(j[i].size()) != cols)
      throw InputError(what + ": ragged rows");
    for (Index c = 0; c < cols; ++c) {
      if (!j[i][c].is_number()) throw InputError(what + ": non-numeric entry");
      M(i, c) = j[i][c].get<double>();
    }
  }
  return M;
}

json vector_to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json triple_to_json(const CovarianceTriple& t, const std::vector<std::string>& assets,
                    const json& provenance) {
  json j;
  j["n"] = t.n();
  j["assets"] = assets;
  j["sigma"] = matrix_to_json(t.sigma);
  j["omega"] = matrix_to_json(t.omega);
  j["response"] = matrix_to_json(t.response);
  j["provenance"] = provenance;
  return j;
}

CovarianceTriple triple_from_json(const json& j, std::vector<std::string>* assets) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
    throw InputError("triple: missing integer 'n'");
  const Index n = j["n"].get<Index>();
  if (n < 1) throw InputError("triple: n must be >= 1");
  for (const char* k : {"sigma", "omega", "response"})
    if (!j.contains(k)) throw InputError(std::string("triple: missing '") + k + "'");
  CovarianceTriple t{matrix_from_json(j["sigma"], n, n, "sigma"), matrix_from_json(j["omega"], n, n, "omega"),
                     matrix_from_json(j["response"], n, n, "response")};
  if (assets) {
    assets->clear();
    if (j.contains("assets")) *assets = j["assets"].get<std::vector<std::string>>();
  }
  return t;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace ximpact::cli
