#pragma once

/**
 * @file driver.hpp
 * @brief Landau damping run: initial condition, Strang-split step,
 * diagnostics and the damping-rate fit of the E_max peaks.
 */

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sldg/field.hpp"
#include "sldg/pencil.hpp"
#include "sldg/vmesh.hpp"
#include "sldg/vsweep.hpp"
#include "sldg/xfield.hpp"

namespace sldg {

inline constexpr double kLandauRate = -0.1533;

struct SimConfig {
  int dv = 3;
  int nb = 4;
  int levels = 0;
  double radius = 6.0;
  int p = 3;
  int nx = 64;
  int px = 2;
  double k = 0.5;
  double alpha = 0.01;
  double dt = 0.1;
  int steps = 200;
  BoundaryMode bc = BoundaryMode::periodic;
  PencilWeighting weighting = PencilWeighting::uniform;
  TransverseCoupling coupling = TransverseCoupling::nodal;
  bool force_slow_path = false;
  int workers = 1;
};

/// Throws std::invalid_argument naming the first bad field.
inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid configuration: " + what); };
  if (c.dv != 1 && c.dv != 3) fail("dv must be 1 or 3");
  if (c.nb < 2) fail("Nb must be >= 2");
  if (c.levels < 0 || c.levels > 3) fail("levels must lie in [0,3]");
  if (!(c.radius > 0.0)) fail("R must be positive");
  if (c.p < 1 || c.p > kMaxDegree) fail("p must lie in [1," + std::to_string(kMaxDegree) + "]");
  if (c.nx < 4) fail("Nx must be >= 4");
  if (c.px < 1 || c.px > kMaxDegree) fail("px must lie in [1," + std::to_string(kMaxDegree) + "]");
  if (!(c.k > 0.0)) fail("k must be positive");
  if (!(c.alpha >= 0.0 && c.alpha < 1.0)) fail("alpha must lie in [0,1)");
  if (!(c.dt > 0.0)) fail("dt must be positive");
  if (c.steps < 0) fail("steps must be >= 0");
  if (c.workers < 1) fail("workers must be >= 1");
}

struct DiagnosticsRecord {
  double t = 0.0;
  double emax = 0.0;
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  double e_field = 0.0;
  double e_total = 0.0;
};

struct Moments {
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

/// Mass, x-momentum and int |v|^2 f, by x and v GLL quadrature.
inline Moments moments(const DistributionField& f, const VelocitySpace& vs, const XGrid& xg) {
  Moments m;
  const auto wx = xg.weights();
  const auto wv = vs.weights();
  for (std::size_t iv = 0; iv < f.nv; ++iv) {
    const double* row = f.values.data() + iv * f.nx;
    double s = 0.0;
    for (std::size_t ix = 0; ix < f.nx; ++ix) s += wx[ix] * row[ix];
    const auto& v = vs.coord(iv);
    const double v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    m.m0 += wv[iv] * s;
    m.m1 += wv[iv] * v[0] * s;
    m.m2 += wv[iv] * v2 * s;
  }
  return m;
}

/// Perturbed Maxwellian on every (velocity DOF, x DOF) pair.
inline DistributionField initialize(const SimConfig& c, const VelocitySpace& vs, const XGrid& xg) {
  DistributionField f(vs.size(), xg.size());
  const double norm = std::pow(2.0 * std::numbers::pi, -0.5 * c.dv);
  std::vector<double> fx(xg.size());
  for (std::size_t ix = 0; ix < xg.size(); ++ix) fx[ix] = 1.0 + c.alpha * std::cos(c.k * xg.coords()[ix]);
  for (std::size_t iv = 0; iv < vs.size(); ++iv) {
    const auto& v = vs.coord(iv);
    const double fv = norm * std::exp(-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]));
    for (std::size_t ix = 0; ix < xg.size(); ++ix) f(iv, ix) = fv * fx[ix];
  }
  return f;
}

class Simulation {
 public:
  explicit Simulation(const SimConfig& config)
      : config_((validate(config), config)),
        vs_(build_mesh(config.dv, config.nb, config.levels, config.radius), config.p),
        xg_(config.nx, config.px, config.k),
        poisson_(xg_),
        pencils_(build_pencils(vs_.mesh(), 0, config.bc, config.weighting)) {
    std::vector<double> vx(vs_.size());
    for (std::size_t iv = 0; iv < vs_.size(); ++iv) vx[iv] = vs_.coord(iv)[0];
    half_x_ = precompute_x_matrices(xg_.basis(), vx, 0.5 * config.dt, xg_.h());
    f_ = initialize(config, vs_, xg_);
    update_field();
  }

  const SimConfig& config() const { return config_; }
  const VelocitySpace& velocity() const { return vs_; }
  const XGrid& xgrid() const { return xg_; }
  const PoissonSolver& poisson() const { return poisson_; }
  const PencilSet& pencils() const { return pencils_; }
  const DistributionField& field() const { return f_; }
  DistributionField& field() { return f_; }
  const std::vector<double>& efield() const { return e_; }
  double time() const { return t_; }
  int step_index() const { return step_; }

  /// Recomputes rho, phi and E from the current f.
  void update_field() { e_ = poisson_.field(compute_rho(f_, vs_)); }

  DiagnosticsRecord diagnostics() const {
    DiagnosticsRecord r;
    r.t = t_;
    for (double e : e_) r.emax = std::max(r.emax, std::abs(e));
    const Moments m = moments(f_, vs_, xg_);
    r.m0 = m.m0;
    r.m1 = m.m1;
    r.m2 = m.m2;
    r.e_field = field_energy(e_, xg_);
    r.e_total = 0.5 * r.m2 + r.e_field;
    return r;
  }

  /// Half x-advection, field solve, full v_x advection, half x-advection.
  DiagnosticsRecord step() {
    advect_x(f_, half_x_, config_.workers);
    update_field();
    advect_velocity(f_, e_, config_.dt, pencils_, vs_, config_.bc, {config_.force_slow_path, config_.workers, config_.coupling});
    advect_x(f_, half_x_, config_.workers);
    ++step_;
    t_ = step_ * config_.dt;
    for (double v : f_.values)
      if (!std::isfinite(v)) throw std::runtime_error("non-finite distribution value at step " + std::to_string(step_));
    update_field();
    return diagnostics();
  }

 private:
  SimConfig config_;
  VelocitySpace vs_;
  XGrid xg_;
  PoissonSolver poisson_;
  PencilSet pencils_;
  XAdvection half_x_;
  DistributionField f_;
  std::vector<double> e_;
  double t_ = 0.0;
  int step_ = 0;
};

struct DampingFit {
  bool ok = false;  ///< false: fewer than two usable peaks
  double gamma = 0.0;
  double intercept = 0.0;
  std::vector<std::size_t> peaks;  ///< indices of the fitted run
};

/**
 * Strict three-point maxima (a plateau counts once, at its first index),
 * truncated to the initial strictly decreasing run, then a least-squares
 * line through (t, log peak).
 */
inline DampingFit fit_damping_rate(const std::vector<double>& t, const std::vector<double>& e) {
  if (t.size() != e.size()) throw std::invalid_argument("fit_damping_rate: series lengths differ");
  DampingFit fit;
  std::vector<std::size_t> all;
  for (std::size_t i = 1; i + 1 < e.size(); ++i) {
    if (!(e[i] > e[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < e.size() && e[j + 1] == e[i]) ++j;
    if (j + 1 < e.size() && e[j + 1] < e[i]) all.push_back(i);
    i = j;
  }
  for (std::size_t i : all) {
    if (!fit.peaks.empty() && !(e[i] < e[fit.peaks.back()])) break;
    fit.peaks.push_back(i);
  }
  if (fit.peaks.size() < 2) {
    fit.peaks.clear();
    return fit;
  }
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  const double n = static_cast<double>(fit.peaks.size());
  for (std::size_t i : fit.peaks) {
    const double y = std::log(e[i]);
    st += t[i];
    sy += y;
    stt += t[i] * t[i];
    sty += t[i] * y;
  }
  fit.gamma = (n * sty - st * sy) / (n * stt - st * st);
  fit.intercept = (sy - fit.gamma * st) / n;
  fit.ok = true;
  return fit;
}

struct RunResult {
  std::vector<DiagnosticsRecord> records;  ///< t = 0 and after every step
  DampingFit fit;
  double mass_error = 0.0;    ///< max |m0 - m0(0)| / |m0(0)|
  double energy_drift = 0.0;  ///< max |e_total - e_total(0)| / |e_total(0)|
  std::size_t cells = 0;
  std::size_t ips = 0;
  double wall_seconds = 0.0;

  double rate_error() const { return std::abs(fit.gamma - kLandauRate) / std::abs(kLandauRate); }
};

inline RunResult run(const SimConfig& config,
                     const std::function<void(const DiagnosticsRecord&)>& on_step = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  Simulation sim(config);
  RunResult r;
  r.cells = sim.velocity().mesh().size();
  r.ips = ip_count(sim.velocity().mesh(), config.p);
  r.records.reserve(config.steps + 1);
  r.records.push_back(sim.diagnostics());
  if (on_step) on_step(r.records.back());
  for (int s = 0; s < config.steps; ++s) {
    r.records.push_back(sim.step());
    if (on_step) on_step(r.records.back());
  }
  const auto& first = r.records.front();
  std::vector<double> t, e;
  for (const auto& rec : r.records) {
    r.mass_error = std::max(r.mass_error, std::abs(rec.m0 - first.m0) / std::abs(first.m0));
    r.energy_drift = std::max(r.energy_drift, std::abs(rec.e_total - first.e_total) / std::abs(first.e_total));
    t.push_back(rec.t);
    e.push_back(rec.emax);
  }
  r.fit = fit_damping_rate(t, e);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace sldg
