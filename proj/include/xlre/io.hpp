#pragma once

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlre/claims.hpp"
#include "xlre/errors.hpp"
#include "xlre/solver.hpp"

namespace xlre::io {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double number(const std::string& text, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError(where + ": expected a number, got '" + text + "'");
  return v;
}

// Two-column CSV (y, survival); a non-numeric first row is a header.
inline ClaimDistribution read_table(const std::filesystem::path& path, const std::string& where) {
  std::ifstream in(path);
  if (!in) throw ConfigError(where + ": cannot open table '" + path.string() + "'");
  std::vector<double> y, s;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 'y,survival'");
    const std::string a = trim(line.substr(0, comma)), b = trim(line.substr(comma + 1));
    const std::string at = path.string() + ":" + std::to_string(n);
    if (y.empty() && s.empty() && !a.empty() && !(std::isdigit(static_cast<unsigned char>(a[0])) || a[0] == '.' || a[0] == '-'))
      continue;
    y.push_back(number(a, at));
    s.push_back(number(b, at));
  }
  try {
    return ClaimDistribution::tabulated(y, s);
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace detail

/// Parses "uniform:M", "exponential:rate", "points:y/s,y/s,..." or
/// "table:path" (relative paths resolve against base_dir).
inline ClaimDistribution parse_distribution(const std::string& spec,
                                            const std::filesystem::path& base_dir = {},
                                            const std::string& where = "dist") {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError(where + ": distribution must look like kind:value, got '" + spec + "'");
  const std::string kind = detail::trim(spec.substr(0, colon));
  const std::string arg = detail::trim(spec.substr(colon + 1));
  try {
    if (kind == "uniform") return ClaimDistribution::uniform(detail::number(arg, where));
    if (kind == "exponential") return ClaimDistribution::exponential(detail::number(arg, where));
    if (kind == "points") {
      std::vector<double> y, s;
      std::stringstream ss(arg);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto slash = item.find('/');
        if (slash == std::string::npos) throw ConfigError(where + ": expected y/survival, got '" + item + "'");
        y.push_back(detail::number(detail::trim(item.substr(0, slash)), where));
        s.push_back(detail::number(detail::trim(item.substr(slash + 1)), where));
      }
      return ClaimDistribution::tabulated(y, s);
    }
    if (kind == "table") {
      std::filesystem::path p(arg);
      if (p.is_relative()) p = base_dir / p;
      return detail::read_table(p, where);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  throw ConfigError(where + ": unknown distribution kind '" + kind + "'");
}

/// Problem file: sections [line1], [line2], [model]; lines "key = value";
/// '#' starts a comment.
inline ProblemSpec parse_problem(std::istream& in, const std::filesystem::path& base_dir = {},
                                 const std::string& name = "<config>") {
  std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sec;
  std::string section, line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string at = name + ":" + std::to_string(n);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "line1" && section != "line2" && section != "model")
        throw ConfigError(at + ": unknown section [" + section + "]");
      if (sec.count(section)) throw ConfigError(at + ": duplicate section [" + section + "]");
      sec[section];
      continue;
    }
    if (section.empty()) throw ConfigError(at + ": key outside of any section");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(at + ": expected 'key = value'");
    auto& s = sec[section];
    if (s.count(key)) throw ConfigError(at + ": duplicate key '" + key + "'");
    s[key] = {value, n};
  }
  for (const char* req : {"line1", "line2", "model"})
    if (!sec.count(req)) throw ConfigError(name + ": missing section [" + std::string(req) + "]");

  auto take = [&](const std::string& s, const std::string& key, bool required) -> std::pair<std::string, std::string> {
    auto& m = sec[s];
    auto it = m.find(key);
    if (it == m.end()) {
      if (required) throw ConfigError(name + ": [" + s + "] is missing '" + key + "'");
      return {"", ""};
    }
    auto v = it->second;
    m.erase(it);
    return {v.first, name + ":" + std::to_string(v.second)};
  };

  ProblemSpec p;
  const auto mode = take("model", "mode", false);
  if (mode.first.empty() || mode.first == "bounded") {
    p.mode = DividendMode::Bounded;
  } else if (mode.first == "unbounded") {
    p.mode = DividendMode::Unbounded;
  } else {
    throw ConfigError(mode.second + ": mode must be 'bounded' or 'unbounded'");
  }
  const auto delta = take("model", "delta", true);
  p.delta = detail::number(delta.first, delta.second);
  const auto a = take("model", "a", true);
  p.a = detail::number(a.first, a.second);
  for (int i = 1; i <= 2; ++i) {
    const std::string s = "line" + std::to_string(i);
    LineSpec& l = i == 1 ? p.line1 : p.line2;
    const auto kappa = take(s, "kappa", true);
    l.kappa = detail::number(kappa.first, kappa.second);
    const auto cbar = take(s, "cbar", p.mode == DividendMode::Bounded);
    if (!cbar.first.empty()) l.cbar = detail::number(cbar.first, cbar.second);
    const auto dist = take(s, "dist", true);
    l.claims = parse_distribution(dist.first, base_dir, dist.second);
  }
  for (const auto& [s, keys] : sec)
    for (const auto& [k, v] : keys)
      throw ConfigError(name + ":" + std::to_string(v.second) + ": unknown key '" + k + "' in [" + s + "]");
  return p;
}

inline ProblemSpec load_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  return parse_problem(in, path.parent_path(), path.string());
}

inline void write_problem(std::ostream& os, const ProblemSpec& p) {
  os << std::setprecision(17);
  for (int i = 1; i <= 2; ++i) {
    const LineSpec& l = i == 1 ? p.line1 : p.line2;
    os << "[line" << i << "]\nkappa = " << l.kappa << '\n';
    if (p.mode == DividendMode::Bounded) os << "cbar = " << l.cbar << '\n';
    os << "dist = " << l.claims.describe() << "\n\n";
  }
  os << "[model]\ndelta = " << p.delta << "\na = " << p.a << "\nmode = "
     << (p.mode == DividendMode::Bounded ? "bounded" : "unbounded") << '\n';
}

/// Policy document: the problem, the case and every solved constant.
inline nlohmann::json policy_document(const SolvedPolicy& s) {
  std::ostringstream problem;
  write_problem(problem, s.problem);
  nlohmann::json j;
  j["format"] = "xlre-policy-1";
  j["problem"] = problem.str();
  j["case"] = to_string(s.case_tag);
  j["swapped"] = s.swapped;
  j["case_b_matching"] = s.options.case_b == CaseBMatching::Slope ? "slope" : "band_width";
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
  };
  nlohmann::json th = nlohmann::json::object();
  for (const auto& [n, v] : s.thresholds()) th[n] = num(v);
  j["thresholds"] = th;
  j["constants"] = {{"w0", num(s.w0)},   {"u1", num(s.u1)},     {"u2", num(s.u2)},
                    {"m0", num(s.m0)},   {"K1", num(s.K1)},     {"K3p", num(s.K3p)},
                    {"K3m", num(s.K3m)}, {"alpha2p", num(s.alpha2p)}, {"alpha2m", num(s.alpha2m)},
                    {"alpha3", num(s.alpha3)}, {"tail_rate", num(s.tail_rate)}};
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : s.pieces)
    pieces.push_back({{"kind", to_string(p.kind)}, {"lo", num(p.lo)}, {"hi", num(p.hi)}});
  j["pieces"] = pieces;
  return j;
}

inline void write_policy(std::ostream& os, const SolvedPolicy& s) {
  os << std::setw(2) << policy_document(s) << '\n';
}

/// Rebuilds a policy from its document. The value function is recomputed
/// from the stored problem and checked against the stored constants.
inline SolvedPolicy read_policy(std::istream& in, double tol = 1e-12) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("policy document: ") + e.what());
  }
  if (j.value("format", "") != "xlre-policy-1") throw ConfigError("policy document: unknown format");
  std::istringstream problem(j.at("problem").get<std::string>());
  SolveOptions opts;
  if (j.value("case_b_matching", "slope") == "band_width") opts.case_b = CaseBMatching::BandWidth;
  const SolvedPolicy s = solve(parse_problem(problem, {}, "<policy>"), opts);
  if (to_string(s.case_tag) != j.at("case").get<std::string>())
    throw ModelInconsistencyError("policy document: case differs on reload");
  auto val = [](const nlohmann::json& v) {
    if (v.is_number()) return v.get<double>();
    const std::string t = v.get<std::string>();
    if (t == "inf") return numerics::kInf;
    if (t == "-inf") return -numerics::kInf;
    return numerics::kNaN;
  };
  const auto& c = j.at("constants");
  const std::pair<const char*, double> now[] = {
      {"w0", s.w0}, {"u1", s.u1}, {"u2", s.u2}, {"m0", s.m0}, {"K1", s.K1}, {"K3p", s.K3p},
      {"K3m", s.K3m}, {"alpha2p", s.alpha2p}, {"alpha2m", s.alpha2m}, {"alpha3", s.alpha3},
      {"tail_rate", s.tail_rate}};
  for (const auto& [k, v] : now) {
    const double stored = val(c.at(k));
    const bool same = (std::isnan(stored) && std::isnan(v)) || stored == v ||
                      std::abs(stored - v) <= tol * std::max(1.0, std::abs(v));
    if (!same)
      throw ModelInconsistencyError(std::string("policy document: constant ") + k + " differs on reload");
  }
  return s;
}

inline SolvedPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open policy '" + path.string() + "'");
  return read_policy(in);
}

}  // namespace xlre::io
