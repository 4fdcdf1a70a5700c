#pragma once

// Output plumbing for the command-line front-end: CSV tables with '#'
// metadata lines, JSON mirrors, and the small parsers for list arguments.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cftqei/applications.hpp"
#include "cftqei/circle.hpp"
#include "cftqei/errors.hpp"
#include "cftqei/weights.hpp"

namespace cftqei::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a, printed as 16 hex digits. Stable across platforms, unlike std::hash.
inline std::string fnv1a_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

inline std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t");
  return std::string(s.substr(a, b - a + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    return circle::detail::parse_double(s);
  } catch (const InputError&) {
    throw InputError(what + ": '" + s + "' is not a number");
  }
}

/// "k=v,k2=v2" -> map. Empty input gives an empty map.
inline weights::Params parse_params(const std::string& s) {
  weights::Params p;
  if (trim(s).empty()) return p;
  for (const auto& item : split(s, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("params: expected key=value, got '" + item + "'");
    const auto key = trim(item.substr(0, eq));
    if (p.count(key)) throw InputError("params: duplicate key '" + key + "'");
    p[key] = to_double(trim(item.substr(eq + 1)), "params " + key);
  }
  return p;
}

/// "1e-1, 1e-2" -> {0.1, 0.01}; must be nonempty.
inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    if (item.empty()) throw InputError(what + ": empty list entry");
    out.push_back(to_double(item, what));
  }
  if (out.empty()) throw InputError(what + ": list must be nonempty");
  return out;
}

inline std::string fmt(double x) { return circle::detail::shortest(x); }

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Meta {
  std::string command;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> extra;
};

inline void write_csv(std::ostream& out, const Meta& m, const Table& t) {
  out << "# command: " << m.command << '\n';
  out << "# version: " << kVersion << '\n';
  out << "# config_hash: " << m.config_hash << '\n';
  for (const auto& [k, v] : m.extra) out << "# " << k << ": " << v << '\n';
  for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << t.columns[j];
  out << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t j = 0; j < r.size(); ++j) out << (j ? "," : "") << fmt(r[j]);
    out << '\n';
  }
}

inline json table_json(const Table& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = json::object();
    for (std::size_t j = 0; j < r.size(); ++j) row[t.columns[j]] = r[j];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json record_json(const applications::BoundRecord& r, const std::string& inputs_hash) {
  json j;
  j["inputs_hash"] = inputs_hash;
  j["bound"] = r.bound;
  j["components"] = r.components;
  j["hypothesis_flags"] = r.flags;
  return j;
}

inline json header_json(const Meta& m) {
  json j;
  j["command"] = m.command;
  j["version"] = kVersion;
  j["config_hash"] = m.config_hash;
  for (const auto& [k, v] : m.extra) j[k] = v;
  return j;
}

/// Writes <out>.csv and <out>.json (any extension on `out` is replaced).
/// With an empty path the CSV goes to `fallback` and no JSON is written.
inline void emit(const std::string& out, const Meta& m, const Table& t, const json& body, std::ostream& fallback) {
  if (out.empty()) {
    write_csv(fallback, m, t);
    return;
  }
  std::filesystem::path base(out);
  auto csv = base;
  csv.replace_extension(".csv");
  auto js = base;
  js.replace_extension(".json");
  std::ofstream c(csv);
  if (!c) throw InputError("cannot write " + csv.string());
  write_csv(c, m, t);
  std::ofstream j(js);
  if (!j) throw InputError("cannot write " + js.string());
  json doc = header_json(m);
  doc["table"] = table_json(t);
  for (const auto& [k, v] : body.items()) doc[k] = v;
  j << doc.dump(2) << '\n';
}

}  // namespace cftqei::io
