#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: flag parsing, table presets and the CSV,
 * plot-script and JSON summary writers.
 */

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sldg/driver.hpp"

namespace sldg::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kRuntimeFailure = 3,
  kInsufficientPeaks = 4,
};

struct Options {
  SimConfig config;
  std::string csv = "landau.csv";
  std::string plot = "landau.gp";
  std::string summary = "landau.json";
  std::string table2;
  bool quiet = false;
};

struct Table2Row {
  int p = 0;
  int nb = 0;
  int levels = 0;
};

/// Accepts q{p}-{Nb}-{L} for the rows of the convergence table.
inline std::optional<Table2Row> parse_table2(const std::string& s) {
  Table2Row r;
  char tail = 0;
  if (std::sscanf(s.c_str(), "q%d-%d-%d%c", &r.p, &r.nb, &r.levels, &tail) != 3) return std::nullopt;
  if (r.p < 3 || r.p > 5) return std::nullopt;
  constexpr std::array uniform{3, 4, 5, 6, 8};
  const bool ok = r.levels == 0 ? std::find(uniform.begin(), uniform.end(), r.nb) != uniform.end()
                                : (r.levels == 1 || r.levels == 2) && (r.nb == 3 || r.nb == 4);
  if (!ok) return std::nullopt;
  return r;
}

inline void configure(CLI::App& app, Options& o) {
  SimConfig& c = o.config;
  const std::map<std::string, BoundaryMode> bcs{{"periodic", BoundaryMode::periodic},
                                                {"absorbing", BoundaryMode::absorbing}};
  const std::map<std::string, PencilWeighting> weights{{"uniform", PencilWeighting::uniform},
                                                       {"area", PencilWeighting::area}};
  const std::map<std::string, TransverseCoupling> couplings{{"nodal", TransverseCoupling::nodal},
                                                            {"projected", TransverseCoupling::projected}};
  app.add_option("--dv", c.dv, "velocity dimensions (1 or 3)")->capture_default_str();
  auto* nb = app.add_option("--Nb", c.nb, "base cells per velocity dimension")->capture_default_str();
  auto* lv = app.add_option("--L", c.levels, "AMR levels near the origin")->capture_default_str();
  app.add_option("--R", c.radius, "velocity domain half-width")->capture_default_str();
  auto* p = app.add_option("--p", c.p, "velocity polynomial degree")->capture_default_str();
  app.add_option("--Nx", c.nx, "x cells")->capture_default_str();
  app.add_option("--px", c.px, "x polynomial degree")->capture_default_str();
  app.add_option("--k", c.k, "perturbation wave number")->capture_default_str();
  app.add_option("--alpha", c.alpha, "perturbation amplitude")->capture_default_str();
  app.add_option("--dt", c.dt, "time step")->capture_default_str();
  app.add_option("--steps", c.steps, "number of time steps")->capture_default_str();
  app.add_option("--bc", c.bc, "velocity boundary: periodic or absorbing")
      ->transform(CLI::CheckedTransformer(bcs, CLI::ignore_case))
      ->default_str("periodic");
  app.add_option("--weighting", c.weighting, "pencil write-back weights: uniform or area")
      ->transform(CLI::CheckedTransformer(weights, CLI::ignore_case))
      ->default_str("uniform");
  app.add_option("--coupling", c.coupling, "transverse coupling: nodal or projected")
      ->transform(CLI::CheckedTransformer(couplings, CLI::ignore_case))
      ->default_str("nodal");
  app.add_flag("--force-slow-path", c.force_slow_path, "route every pencil through the generalized overlap path");
  app.add_option("--workers", c.workers, "OpenMP threads")->capture_default_str();
  app.add_option("--table2", o.table2, "preset q{p}-{Nb}-{L}, e.g. q5-4-0")->excludes(nb)->excludes(lv)->excludes(p);
  app.add_option("--csv", o.csv, "time series output")->capture_default_str();
  app.add_option("--plot", o.plot, "gnuplot script output")->capture_default_str();
  app.add_option("--summary", o.summary, "JSON summary output")->capture_default_str();
  app.add_flag("-q,--quiet", o.quiet, "no progress or summary on stdout");
}

/// Empty result: proceed with the run. Otherwise the process exit code.
inline std::optional<int> parse_args(int argc, const char* const* argv, Options& o, std::ostream& out,
                                     std::ostream& err) {
  CLI::App app{"Semi-Lagrangian DG Vlasov-Poisson Landau damping"};
  configure(app, o);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }
  if (!o.table2.empty()) {
    const auto row = parse_table2(o.table2);
    if (!row) {
      err << "invalid configuration: unknown table row '" << o.table2 << "'\n";
      return kConfigError;
    }
    o.config.p = row->p;
    o.config.nb = row->nb;
    o.config.levels = row->levels;
  }
  try {
    validate(o.config);
  } catch (const std::invalid_argument& e) {
    err << e.what() << "\n" << app.help();
    return kConfigError;
  }
  return std::nullopt;
}

inline std::string format_csv(const std::vector<DiagnosticsRecord>& records) {
  std::string s = "t,emax,m0,m1,m2,e_field,e_total\n";
  char line[256];
  for (const auto& r : records) {
    std::snprintf(line, sizeof line, "%.17e,%.17e,%.17e,%.17e,%.17e,%.17e,%.17e\n", r.t, r.emax, r.m0, r.m1, r.m2,
                  r.e_field, r.e_total);
    s += line;
  }
  return s;
}

/// Semilog E_max against t with the fitted envelope and the fitted peaks.
inline std::string gnuplot_script(const RunResult& r, const std::string& csv_path, const std::string& image_path) {
  std::ostringstream g;
  g.precision(17);
  g << "set datafile separator ','\n"
    << "set terminal pngcairo size 900,540\n"
    << "set output '" << image_path << "'\n"
    << "set logscale y\n"
    << "set format y '10^{%T}'\n"
    << "set xlabel 't'\n"
    << "set ylabel 'max |E|'\n"
    << "set key top right\n"
    << "set grid\n";
  g << "$peaks << EOD\n";
  for (std::size_t i : r.fit.peaks) g << r.records[i].t << " " << r.records[i].emax << "\n";
  g << "EOD\n";
  g << "plot '" << csv_path << "' using 1:2 skip 1 with lines lw 1.5 title 'E_{max}'";
  if (r.fit.ok) {
    g << ", \\\n     exp(" << r.fit.intercept << " + " << r.fit.gamma << "*x) with lines dt 2 lw 1.5 title 'fit {/Symbol g} = "
      << std::setprecision(4) << r.fit.gamma << "'";
    g << ", \\\n     $peaks using 1:2 with points pt 7 ps 1.2 title 'peaks'";
  }
  g << "\n";
  return g.str();
}

inline nlohmann::ordered_json summary_json(const RunResult& r, const SimConfig& c) {
  nlohmann::ordered_json j;
  j["fit"] = r.fit.ok ? "ok" : "insufficient peaks";
  j["gamma_hat"] = r.fit.ok ? nlohmann::ordered_json(r.fit.gamma) : nlohmann::ordered_json(nullptr);
  j["gamma_reference"] = kLandauRate;
  j["rate_error_percent"] = r.fit.ok ? nlohmann::ordered_json(100.0 * r.rate_error()) : nlohmann::ordered_json(nullptr);
  j["n_peaks"] = r.fit.peaks.size();
  j["mass_error"] = r.mass_error;
  j["energy_drift"] = r.energy_drift;
  j["cells"] = r.cells;
  j["ips"] = r.ips;
  j["wall_seconds"] = r.wall_seconds;
  j["config"] = {{"dv", c.dv},       {"Nb", c.nb},       {"L", c.levels}, {"R", c.radius},   {"p", c.p},
                 {"Nx", c.nx},       {"px", c.px},       {"k", c.k},      {"alpha", c.alpha}, {"dt", c.dt},
                 {"steps", c.steps}, {"workers", c.workers}};
  j["config"]["bc"] = c.bc == BoundaryMode::periodic ? "periodic" : "absorbing";
  j["config"]["weighting"] = c.weighting == PencilWeighting::uniform ? "uniform" : "area";
  j["config"]["coupling"] = c.coupling == TransverseCoupling::nodal ? "nodal" : "projected";
  j["config"]["force_slow_path"] = c.force_slow_path;
  return j;
}

inline std::string image_path_for(const std::string& plot_path) {
  return std::filesystem::path(plot_path).replace_extension(".png").string();
}

}  // namespace sldg::cli
