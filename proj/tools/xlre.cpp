// xlre: solve, tabulate, simulate and verify two-line dividend/reinsurance
// problems described by a problem file.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "xlre/io.hpp"
#include "xlre/simulate.hpp"
#include "xlre/solver.hpp"
#include "xlre/strategy.hpp"
#include "xlre/verify.hpp"

namespace fs = std::filesystem;
using namespace xlre;

namespace {

struct Grid {
  double lo = 0.0, hi = numerics::kNaN;
  std::size_t points = 601;
};

Grid parse_grid(const std::string& text) {
  Grid g;
  if (text.empty()) return g;
  std::stringstream ss(text);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
    throw ConfigError("--grid must look like xmin:xmax:points");
  try {
    g.lo = std::stod(a);
    g.hi = std::stod(b);
    const long n = std::stol(c);
    if (n < 2) throw ConfigError("--grid needs at least 2 points");
    g.points = static_cast<std::size_t>(n);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("--grid must look like xmin:xmax:points");
  }
  if (!(g.lo >= 0.0 && g.hi > g.lo)) throw ConfigError("--grid needs 0 <= xmin < xmax");
  return g;
}

std::vector<double> grid_points(const Grid& g, const SolvedPolicy& s) {
  double hi = g.hi;
  if (std::isnan(hi)) {
    hi = 0.0;
    for (const auto& [n, v] : s.thresholds()) hi = std::max(hi, v);
    hi += 3.0;
  }
  std::vector<double> x(g.points);
  for (std::size_t i = 0; i < g.points; ++i)
    x[i] = i + 1 == g.points ? hi : g.lo + (hi - g.lo) * static_cast<double>(i) / static_cast<double>(g.points - 1);
  return x;
}

std::string threshold_at(const SolvedPolicy& s, double lo, double hi) {
  std::string out;
  for (const auto& [n, v] : s.thresholds())
    if (v >= lo && v < hi) out += (out.empty() ? "" : "|") + n;
  return out;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw ConfigError("cannot write " + (dir / name).string());
  return f;
}

void print_summary(std::ostream& os, const SolvedPolicy& s) {
  os << std::setprecision(9) << to_string(s.case_tag);
  for (const auto& [n, v] : s.thresholds()) os << ", " << n << '=' << v;
  if (s.case_tag == CaseTag::BoundedC) os << ", M0=" << s.m0;
  os << '\n';
  if (s.swapped) os << "lines swapped: the normalized Line 1 is input line 2\n";
  os << "K1=" << s.K1;
  if (s.bounded()) os << " K3+=" << s.K3p << " K3-=" << s.K3m;
  if (s.case_tag == CaseTag::BoundedB) os << " closed-form K3-=" << s.closed_form_k3m;
  os << '\n';
}

// Grid cells [x_i, x_{i+1}) that contain a threshold carry its name.
template <class Row>
void write_grid_csv(std::ostream& os, const std::string& header, const std::vector<double>& x,
                    const SolvedPolicy& s, Row row) {
  os << header << ",threshold\n" << std::setprecision(12);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double next = i + 1 < x.size() ? x[i + 1] : numerics::kInf;
    os << x[i];
    row(os, x[i]);
    os << ',' << threshold_at(s, x[i], next) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal reinsurance, dividends and capital injection for two collaborating lines"};
  std::string command, config, out_dir = ".", grid_text;
  std::size_t paths = 100000;
  double dt = 1e-3, horizon = 40.0, check_tol = 1e-6, x1 = 0.5, x2 = 0.5;
  std::uint64_t seed = 20240601;
  std::size_t drift_paths = 0;
  app.add_option("command", command, "solve | curve | simulate | verify")
      ->required()
      ->check(CLI::IsMember({"solve", "curve", "simulate", "verify"}));
  app.add_option("--config", config, "problem file")->required()->envname("XLRE_CONFIG");
  app.add_option("--out", out_dir, "output directory")->envname("XLRE_OUT");
  app.add_option("--grid", grid_text, "xmin:xmax:points")->envname("XLRE_GRID");
  app.add_option("--paths", paths, "simulated paths")->envname("XLRE_PATHS");
  app.add_option("--dt", dt, "time step")->envname("XLRE_DT");
  app.add_option("--seed", seed, "random seed")->envname("XLRE_SEED");
  app.add_option("--check-tol", check_tol, "HJB residual factor of delta * g(x)")->envname("XLRE_CHECK_TOL");
  app.add_option("--horizon", horizon, "simulated time")->envname("XLRE_HORIZON");
  app.add_option("--x1", x1, "initial reserve of line 1")->envname("XLRE_X1");
  app.add_option("--x2", x2, "initial reserve of line 2")->envname("XLRE_X2");
  app.add_option("--drift-paths", drift_paths, "paths for the time-step drift estimate (0: skip)")
      ->envname("XLRE_DRIFT_PATHS");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!fs::exists(config)) throw ConfigError("config file '" + config + "' does not exist");
    const Grid grid = parse_grid(grid_text);
    const auto t0 = std::chrono::steady_clock::now();
    const SolvedPolicy s = solve(io::load_problem(config));
    const double solve_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const fs::path out(out_dir);

    if (command == "solve") {
      print_summary(std::cout, s);
      std::cout << "solved in " << std::setprecision(3) << solve_s << " s\n";
      auto f = open_out(out, "policy.json");
      io::write_policy(f, s);
      return 0;
    }

    if (command == "curve") {
      const auto x = grid_points(grid, s);
      auto vf = open_out(out, "value.csv");
      write_grid_csv(vf, "x,g,g1,g2", x, s, [&](std::ostream& os, double v) {
        const auto d = s.value(v);
        os << ',' << d.g << ',' << d.g1 << ',' << d.g2;
      });
      auto sf = open_out(out, "strategy.csv");
      write_grid_csv(sf, "x,pi1,pi2,c1,c2", x, s, [&](std::ostream& os, double v) {
        const auto c = controls(s, v).relabeled(s.swapped);
        os << ',' << c.pi1 << ',' << c.pi2 << ',' << c.c1 << ',' << c.c2;
      });
      print_summary(std::cout, s);
      std::cout << "wrote " << (out / "value.csv").string() << " and " << (out / "strategy.csv").string() << '\n';
      return 0;
    }

    if (command == "simulate") {
      SimConfig cfg;
      cfg.paths = paths;
      cfg.dt = dt;
      cfg.seed = seed;
      cfg.horizon = horizon;
      const double n1 = s.swapped ? x2 : x1, n2 = s.swapped ? x1 : x2;
      const PolicyStrategy st(s);
      const auto e = simulate_value(st, s.model.delta, n1, n2, cfg);
      double drift = 0.0;
      if (drift_paths > 0) {
        SimConfig dc = cfg;
        dc.paths = drift_paths;
        drift = std::abs(dt_halving_drift(st, s.model.delta, n1, n2, dc).drift);
      }
      const double g = s.value(x1 + x2).g;
      const double band = 2.5 * e.stderr_ + e.truncation_bound + 3.0 * drift;
      const bool ok = std::abs(e.mean - g) <= band;
      auto f = open_out(out, "simulate.csv");
      write_csv(f, e);
      std::ostringstream txt;
      txt << std::setprecision(9) << "start (" << x1 << ", " << x2 << "), " << paths << " paths, dt " << dt
          << ", horizon " << horizon << "\nmean " << e.mean << " stderr " << e.stderr_ << " ruined "
          << e.paths_ruined << " truncation " << e.truncation_bound << "\ng(" << x1 + x2 << ") = " << g
          << ", |mean - g| = " << std::abs(e.mean - g) << ", band " << band
          << (drift_paths ? "" : " (no drift term)") << "\n"
          << (ok ? "PASS" : "FAIL") << '\n';
      open_out(out, "simulate.txt") << txt.str();
      std::cout << txt.str();
      return ok ? 0 : 1;
    }

    // verify
    VerifyOptions vo;
    vo.hjb.tol_scale = check_tol;
    if (!grid_text.empty()) vo.grid_points = grid.points;
    const auto rep = verify_all(s, vo);
    auto f = open_out(out, "verify.csv");
    rep.write_csv(f);
    std::ostringstream txt;
    print_summary(txt, s);
    rep.write_text(txt);
    open_out(out, "verify.txt") << txt.str();
    std::cout << txt.str();
    return rep.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
