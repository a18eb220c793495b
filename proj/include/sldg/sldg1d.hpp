#pragma once

/**
 * @file sldg1d.hpp
 * @brief Semi-Lagrangian DG translation on a uniform 1D pencil.
 *
 * A cell-local degree-p nodal polynomial is translated by a*dt and projected
 * back onto the destination cells in L2. With a*dt/h = n_s + alpha the
 * destination cell i receives contributions from exactly two source cells,
 * i - n_s (through A) and i - n_s - 1 (through B).
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sldg/basis.hpp"

namespace sldg {

enum class BoundaryMode { absorbing, periodic };

struct ShiftDecomposition {
  std::int64_t cells = 0;  ///< n_s, integer cell shift
  double alpha = 0.0;      ///< fractional shift in [0,1)
};

/// Split a displacement measured in cell widths into floor and fraction.
inline ShiftDecomposition decompose_cells(double shift_in_cells) {
  if (!std::isfinite(shift_in_cells)) throw std::invalid_argument("decompose_cells: non-finite shift");
  const double n = std::floor(shift_in_cells);
  ShiftDecomposition s{static_cast<std::int64_t>(n), shift_in_cells - n};
  if (s.alpha < 0.0) s.alpha = 0.0;
  // fold alpha within one ulp of the shift below 1 into the next integer
  // shift, so no overlap interval has zero width
  const double ulp = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(shift_in_cells));
  if (1.0 - s.alpha <= ulp) {
    s.cells += 1;
    s.alpha = 0.0;
  }
  return s;
}

inline ShiftDecomposition decompose_shift(double speed, double dt, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("decompose_shift: cell width must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("decompose_shift: time step must be positive");
  return decompose_cells(speed * dt / h);
}

/// Same-cell (A) and neighbour-cell (B) projection blocks for one fractional shift.
struct OverlapPair {
  Matrix A;
  Matrix B;
  double alpha = 0.0;
};

/**
 * Builds A and B from the projection property: destination basis times
 * translated source basis, integrated over the two overlap subintervals with
 * the exact 2p+2 Gauss rule, then M^{-1} applied.
 *
 * In destination reference coordinates the same-cell source covers
 * [2alpha-1, 1] with source coordinate xi - 2alpha, and the neighbour covers
 * [-1, 2alpha-1] with source coordinate xi - 2alpha + 2.
 */
inline OverlapPair overlap_pair(const DGBasis& basis, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("overlap_pair: alpha outside [0,1)");
  const int n = basis.size();
  OverlapPair pair{Matrix::Zero(n, n), Matrix::Zero(n, n), alpha};
  if (alpha == 0.0) {
    pair.A = Matrix::Identity(n, n);
    return pair;
  }

  const QuadratureRule& g = basis.gauss();
  std::vector<double> dst(n), src(n);
  auto integrate = [&](double lo, double hi, double src_offset, Matrix& out) {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (std::size_t q = 0; q < g.size(); ++q) {
      const double xi = mid + half * g.nodes[q];
      const double w = half * g.weights[q];
      basis.eval_all(xi, dst);
      basis.eval_all(xi + src_offset, src);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) += w * dst[i] * src[j];
    }
  };
  const double split = 2.0 * alpha - 1.0;
  integrate(split, 1.0, -2.0 * alpha, pair.A);
  integrate(-1.0, split, 2.0 - 2.0 * alpha, pair.B);
  pair.A = basis.mass_inv() * pair.A;
  pair.B = basis.mass_inv() * pair.B;
  return pair;
}

/// out[r] += sum_j m(r,j) * in[j]; the one block kernel every sweep path uses.
inline void accumulate_block(const double* m, int n, const double* in, double* out) {
  for (int r = 0; r < n; ++r) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += m[r * n + j] * in[j];
    out[r] += acc;
  }
}

inline std::int64_t wrap_index(std::int64_t i, std::int64_t n) {
  const std::int64_t r = i % n;
  return r < 0 ? r + n : r;
}

/**
 * Uniform-pencil SLDG update. `in` and `out` hold (p+1) values per cell,
 * cell-major; they must not alias.
 */
inline void apply_update(std::span<const double> in, std::span<double> out, const ShiftDecomposition& shift,
                         const OverlapPair& pair, BoundaryMode bc) {
  const int n = static_cast<int>(pair.A.rows());
  const auto ncells = static_cast<std::int64_t>(in.size() / n);
  if (ncells < 1 || in.size() != out.size() || in.size() % n != 0)
    throw std::invalid_argument("apply_update: pencil size mismatch");
  for (std::int64_t i = 0; i < ncells; ++i) {
    double* dst = out.data() + i * n;
    for (int r = 0; r < n; ++r) dst[r] = 0.0;
    std::int64_t same = i - shift.cells;
    std::int64_t neighbour = same - 1;
    if (bc == BoundaryMode::periodic) {
      same = wrap_index(same, ncells);
      neighbour = wrap_index(neighbour, ncells);
    }
    if (same >= 0 && same < ncells) accumulate_block(pair.A.data(), n, in.data() + same * n, dst);
    if (neighbour >= 0 && neighbour < ncells) accumulate_block(pair.B.data(), n, in.data() + neighbour * n, dst);
  }
}

inline std::vector<double> apply_update(std::span<const double> in, const ShiftDecomposition& shift,
                                        const OverlapPair& pair, BoundaryMode bc) {
  std::vector<double> out(in.size());
  apply_update(in, out, shift, pair, bc);
  return out;
}

/// Mass of a uniform pencil, sum_i sum_j (h/2) w_j u_ij.
inline double pencil_mass(std::span<const double> values, const DGBasis& basis, double h) {
  const int n = basis.size();
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += basis.weights()[i % n] * values[i];
  return 0.5 * h * m;
}

}  // namespace sldg
