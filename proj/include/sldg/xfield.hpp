#pragma once

/**
 * @file xfield.hpp
 * @brief Periodic 1D DG x-grid, x-advection, charge density and the
 * continuous-FE periodic Poisson solve for the electric field.
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <omp.h>

#include "sldg/basis.hpp"
#include "sldg/field.hpp"
#include "sldg/sldg1d.hpp"

namespace sldg {

/// N_x cells of degree p_x on [0, 2 pi / k); DOF ix = cell (p_x+1) + node.
class XGrid {
 public:
  XGrid(int cells, int degree, double wavenumber) : cells_(cells), basis_(degree), k_(wavenumber) {
    if (cells < 4) throw std::invalid_argument("XGrid: N_x must be >= 4");
    if (!(wavenumber > 0.0)) throw std::invalid_argument("XGrid: wave number must be positive");
    length_ = 2.0 * std::numbers::pi / k_;
    h_ = length_ / cells_;
    const int n = basis_.size();
    coords_.resize(static_cast<std::size_t>(cells_) * n);
    weights_.resize(coords_.size());
    for (int e = 0; e < cells_; ++e)
      for (int j = 0; j < n; ++j) {
        coords_[e * n + j] = e * h_ + 0.5 * h_ * (basis_.nodes()[j] + 1.0);
        weights_[e * n + j] = 0.5 * h_ * basis_.weights()[j];
      }
  }

  int cells() const { return cells_; }
  int degree() const { return basis_.degree(); }
  const DGBasis& basis() const { return basis_; }
  double wavenumber() const { return k_; }
  double length() const { return length_; }
  double h() const { return h_; }
  std::size_t size() const { return coords_.size(); }
  std::span<const double> coords() const { return coords_; }
  std::span<const double> weights() const { return weights_; }

 private:
  int cells_;
  DGBasis basis_;
  double k_;
  double length_ = 0.0;
  double h_ = 0.0;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

/// Per-velocity-DOF x-shifts for a fixed time step, deduplicated by speed.
struct XAdvection {
  std::vector<ShiftDecomposition> shifts;  ///< per distinct speed
  std::vector<OverlapPair> pairs;          ///< per distinct speed
  std::vector<std::size_t> index;          ///< iv -> distinct speed
};

inline XAdvection precompute_x_matrices(const DGBasis& basis, std::span<const double> speeds, double dt,
                                        double h) {
  XAdvection xa;
  xa.index.resize(speeds.size());
  std::map<double, std::size_t> seen;
  for (std::size_t iv = 0; iv < speeds.size(); ++iv) {
    if (!std::isfinite(speeds[iv])) throw std::invalid_argument("precompute_x_matrices: non-finite speed");
    auto [it, inserted] = seen.emplace(speeds[iv], xa.shifts.size());
    if (inserted) {
      const auto s = decompose_shift(speeds[iv], dt, h);
      xa.shifts.push_back(s);
      xa.pairs.push_back(overlap_pair(basis, s.alpha));
    }
    xa.index[iv] = it->second;
  }
  return xa;
}

/// Periodic SLDG translation of every velocity row; untranslated rows are left untouched.
inline void advect_x(DistributionField& f, const XAdvection& xa, int workers = 1) {
  if (xa.index.size() != f.nv) throw std::invalid_argument("advect_x: precomputed shifts do not match field");
  const auto nv = static_cast<std::int64_t>(f.nv);
#pragma omp parallel num_threads(std::max(1, workers))
  {
    std::vector<double> buf(f.nx);
#pragma omp for schedule(static)
    for (std::int64_t iv = 0; iv < nv; ++iv) {
      const std::size_t u = xa.index[iv];
      const auto& s = xa.shifts[u];
      const auto row = f.row(static_cast<std::size_t>(iv));
      if (s.alpha == 0.0 && s.cells == 0) continue;
      apply_update(row, buf, s, xa.pairs[u], BoundaryMode::periodic);
      std::copy(buf.begin(), buf.end(), row.begin());
    }
  }
}

/// rho[ix] = sum_iv w_iv f[iv, ix].
inline std::vector<double> compute_rho(const DistributionField& f, const VelocitySpace& vs) {
  std::vector<double> rho(f.nx, 0.0);
  const auto w = vs.weights();
  for (std::size_t iv = 0; iv < f.nv; ++iv) {
    const double* r = f.values.data() + iv * f.nx;
    for (std::size_t ix = 0; ix < f.nx; ++ix) rho[ix] += w[iv] * r[ix];
  }
  return rho;
}

/**
 * -phi'' = rho - mean(rho) with periodic continuous elements of degree p_x on
 * the x-grid cells and a zero-mean constraint enforced by a multiplier.
 */
class PoissonSolver {
 public:
  explicit PoissonSolver(const XGrid& grid) : grid_(grid) {
    const DGBasis& b = grid.basis();
    const int n = b.size();
    const int p = b.degree();
    nodes_ = grid.cells() * p;
    stiffness_ = Eigen::MatrixXd::Zero(nodes_, nodes_);
    constraint_ = Eigen::VectorXd::Zero(nodes_);
    // d_ij = l_j'(xi_i)
    deriv_.resize(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) deriv_[i * n + j] = b.derivative(j, b.nodes()[i]);
    // GLL quadrature is exact for the degree 2p-2 integrand
    for (int e = 0; e < grid.cells(); ++e)
      for (int i = 0; i < n; ++i) {
        constraint_(global(e, i)) += 0.5 * grid.h() * b.weights()[i];
        for (int j = 0; j < n; ++j) {
          double kij = 0.0;
          for (int q = 0; q < n; ++q) kij += b.weights()[q] * deriv_[q * n + i] * deriv_[q * n + j];
          stiffness_(global(e, i), global(e, j)) += 2.0 / grid.h() * kij;
        }
      }
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(nodes_ + 1, nodes_ + 1);
    sys.topLeftCorner(nodes_, nodes_) = stiffness_;
    sys.block(0, nodes_, nodes_, 1) = constraint_;
    sys.block(nodes_, 0, 1, nodes_) = constraint_.transpose();
    lu_.compute(sys);
  }

  /// Global FE node of local node j in cell e.
  int global(int e, int j) const { return (e * grid_.degree() + j) % nodes_; }
  int node_count() const { return nodes_; }

  double mean(std::span<const double> rho) const {
    double s = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) s += grid_.weights()[i] * rho[i];
    return s / grid_.length();
  }

  /// Load vector int psi_g (rho - mean) dx, exact for the DG representation of rho.
  Eigen::VectorXd load(std::span<const double> rho) const {
    if (rho.size() != grid_.size()) throw std::invalid_argument("PoissonSolver: rho size mismatch");
    const DGBasis& b = grid_.basis();
    const int n = b.size();
    const double rbar = mean(rho);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nodes_);
    for (int e = 0; e < grid_.cells(); ++e)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += b.mass()(i, j) * (rho[e * n + j] - rbar);
        rhs(global(e, i)) += 0.5 * grid_.h() * s;
      }
    return rhs;
  }

  /// Potential at the FE nodes.
  std::vector<double> solve(std::span<const double> rho) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nodes_ + 1);
    rhs.head(nodes_) = load(rho);
    const Eigen::VectorXd sol = lu_.solve(rhs);
    return {sol.data(), sol.data() + nodes_};
  }

  /// E = -phi' at every DG x DOF, taken inside the owning cell.
  std::vector<double> electric_field(std::span<const double> phi) const {
    const int n = grid_.basis().size();
    std::vector<double> e(grid_.size());
    for (int c = 0; c < grid_.cells(); ++c)
      for (int i = 0; i < n; ++i) {
        double d = 0.0;
        for (int j = 0; j < n; ++j) d += deriv_[i * n + j] * phi[global(c, j)];
        e[c * n + i] = -2.0 / grid_.h() * d;
      }
    return e;
  }

  std::vector<double> field(std::span<const double> rho) const { return electric_field(solve(rho)); }

  /// max |K phi - b| of the discrete weak form.
  double weak_residual(std::span<const double> rho, std::span<const double> phi) const {
    const Eigen::Map<const Eigen::VectorXd> x(phi.data(), nodes_);
    return (stiffness_ * x - load(rho)).cwiseAbs().maxCoeff();
  }

  /// Potential at an arbitrary x in [0, L).
  double potential_at(std::span<const double> phi, double x) const {
    const double l = grid_.length();
    x = x - l * std::floor(x / l);
    const int e = std::min(grid_.cells() - 1, static_cast<int>(x / grid_.h()));
    const double xi = 2.0 * (x - e * grid_.h()) / grid_.h() - 1.0;
    double v = 0.0;
    for (int j = 0; j < grid_.basis().size(); ++j) v += phi[global(e, j)] * grid_.basis().eval(j, xi);
    return v;
  }

 private:
  XGrid grid_;
  int nodes_ = 0;
  Eigen::MatrixXd stiffness_;
  Eigen::VectorXd constraint_;
  std::vector<double> deriv_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// 1/2 int E^2 dx by GLL quadrature.
inline double field_energy(std::span<const double> e, const XGrid& grid) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += grid.weights()[i] * e[i] * e[i];
  return 0.5 * s;
}

}  // namespace sldg
