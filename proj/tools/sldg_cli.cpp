#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>

#include "sldg/cli.hpp"

namespace {

bool open_output(std::ofstream& s, const std::string& path) {
  s.open(path, std::ios::binary | std::ios::trunc);
  if (!s) std::cerr << "error: cannot write '" << path << "'\n";
  return static_cast<bool>(s);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace sldg;
  cli::Options o;
  if (auto code = cli::parse_args(argc, argv, o, std::cout, std::cerr)) return *code;

  std::ofstream csv, plot, summary;
  if (!open_output(csv, o.csv) || !open_output(plot, o.plot) || !open_output(summary, o.summary))
    return cli::kRuntimeFailure;

  RunResult r;
  try {
    const int every = std::max(1, o.config.steps / 20);
    r = run(o.config, [&](const DiagnosticsRecord& d) {
      if (o.quiet) return;
      const long s = std::lround(d.t / o.config.dt);
      if (s % every == 0 || s == o.config.steps)
        std::printf("step %5ld  t = %8.3f  emax = %.6e  e_total = %.12e\n", s, d.t, d.emax, d.e_total);
    });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kRuntimeFailure;
  }

  const auto j = cli::summary_json(r, o.config);
  csv << cli::format_csv(r.records);
  plot << cli::gnuplot_script(r, o.csv, cli::image_path_for(o.plot));
  summary << j.dump(2) << "\n";
  csv.close();
  plot.close();
  summary.close();
  if (!csv || !plot || !summary) {
    std::cerr << "error: failed writing outputs\n";
    return cli::kRuntimeFailure;
  }
  if (!o.quiet) std::cout << j.dump(2) << "\n";
  if (!r.fit.ok) {
    std::cerr << "warning: insufficient peaks for a damping-rate fit\n";
    return cli::kInsufficientPeaks;
  }
  return cli::kOk;
}
