#pragma once

/**
 * @file vsweep.hpp
 * @brief Hybrid fast/slow SLDG sweep along one velocity axis of an AMR mesh.
 *
 * Conforming cells whose two-cell stencil lies inside their own same-level run
 * use the per-level A/B matrices. All other cells integrate the destination
 * basis against every source cell the foot interval touches (generalized
 * overlap). Multi-pencil cells are averaged back with their transverse weights.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <omp.h>

#include "sldg/basis.hpp"
#include "sldg/field.hpp"
#include "sldg/pencil.hpp"
#include "sldg/sldg1d.hpp"
#include "sldg/tensor.hpp"
#include "sldg/vmesh.hpp"

namespace sldg {

struct LevelShift {
  ShiftDecomposition shift;
  OverlapPair pair;
};

/// One shift decomposition and overlap pair per refinement level.
struct LevelMatrices {
  double displacement = 0.0;  ///< a * dt
  std::vector<LevelShift> levels;
};

inline LevelMatrices precompute_level_matrices(const DGBasis& basis, double displacement,
                                               const VelocityMesh& mesh) {
  LevelMatrices lm;
  lm.displacement = displacement;
  const int top = std::max(mesh.max_level, mesh.finest_level());
  for (int l = 0; l <= top; ++l) {
    const auto s = decompose_cells(displacement / mesh.level_width(l));
    lm.levels.push_back({s, overlap_pair(basis, s.alpha)});
  }
  return lm;
}

inline LevelMatrices precompute_level_matrices(const DGBasis& basis, double speed, double dt,
                                               const VelocityMesh& mesh) {
  if (!(dt > 0.0)) throw std::invalid_argument("precompute_level_matrices: time step must be positive");
  return precompute_level_matrices(basis, speed * dt, mesh);
}

struct CellExtent {
  double lo = 0.0;
  double width = 1.0;
  double hi() const { return lo + width; }
};

/// Projection block from one source cell into one destination cell, M^{-1} applied.
struct GeneralizedOverlap {
  std::size_t dest = 0;
  std::size_t src = 0;
  Matrix matrix;
  double v_left = 0.0;
  double v_right = 0.0;
};

namespace detail {

/**
 * Writes M^{-1} M^{(s,c)} into out (row-major n x n) and returns the overlap
 * width. `scratch` needs 3n + n*n doubles.
 */
inline double generalized_block(const DGBasis& basis, CellExtent dest, CellExtent src, double displacement,
                                double* out, double* scratch, double* v_left = nullptr, double* v_right = nullptr) {
  const int n = basis.size();
  const double foot_lo = dest.lo - displacement;
  const double foot_hi = dest.hi() - displacement;
  const double a = std::max(foot_lo, src.lo);
  const double b = std::min(foot_hi, src.hi());
  if (v_left) *v_left = a;
  if (v_right) *v_right = std::max(a, b);
  double* raw = scratch;
  double* phi_d = scratch + n * n;
  double* phi_s = phi_d + n;
  std::fill(raw, raw + n * n, 0.0);
  if (b <= a) {
    std::fill(out, out + n * n, 0.0);
    return 0.0;
  }
  const QuadratureRule& g = basis.gauss();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const double jac = half * 2.0 / dest.width;
  for (std::size_t q = 0; q < g.size(); ++q) {
    const double v = mid + half * g.nodes[q];
    const double xd = 2.0 * (v + displacement - dest.lo) / dest.width - 1.0;
    const double xs = 2.0 * (v - src.lo) / src.width - 1.0;
    basis.eval_all(xd, {phi_d, static_cast<std::size_t>(n)});
    basis.eval_all(xs, {phi_s, static_cast<std::size_t>(n)});
    const double w = jac * g.weights[q];
    for (int i = 0; i < n; ++i) {
      const double wi = w * phi_d[i];
      for (int j = 0; j < n; ++j) raw[i * n + j] += wi * phi_s[j];
    }
  }
  const double* minv = basis.mass_inv().data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += minv[i * n + k] * raw[k * n + j];
      out[i * n + j] = acc;
    }
  return b - a;
}

}  // namespace detail

inline GeneralizedOverlap generalized_overlap(const DGBasis& basis, CellExtent dest, CellExtent src,
                                              double displacement, std::size_t dest_id = 0, std::size_t src_id = 0) {
  const int n = basis.size();
  GeneralizedOverlap g;
  g.dest = dest_id;
  g.src = src_id;
  g.matrix = Matrix::Zero(n, n);
  std::vector<double> scratch(3 * n + n * n);
  detail::generalized_block(basis, dest, src, displacement, g.matrix.data(), scratch.data(), &g.v_left,
                            &g.v_right);
  return g;
}

/**
 * Linear map of one pencil's packed values (p+1 per cell, sweep order) to its
 * swept values, stored as per-destination lists of (source, block) terms.
 */
struct PencilOperator {
  int n = 0;
  std::size_t ncells = 0;
  std::vector<std::uint32_t> term_begin;  ///< CSR over destinations
  std::vector<std::uint32_t> term_src;
  std::vector<std::uint32_t> term_block;
  std::vector<double> blocks;             ///< n*n row-major blocks
  std::size_t fast_cells = 0;
  std::size_t slow_cells = 0;

  void apply(const double* in, double* out) const {
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    for (std::size_t s = 0; s < ncells; ++s) {
      double* dst = out + s * n;
      for (int r = 0; r < n; ++r) dst[r] = 0.0;
      for (std::uint32_t t = term_begin[s]; t < term_begin[s + 1]; ++t)
        accumulate_block(blocks.data() + term_block[t] * nn, n, in + static_cast<std::size_t>(term_src[t]) * n, dst);
    }
  }
};

/// How a cell spanning several pencils enters and leaves each of them.
enum class TransverseCoupling {
  nodal,      ///< the cell's own nodal lines, averaged back with w_c
  projected,  ///< exact restriction to the pencil box, L2 projection back
};

struct SweepOptions {
  bool force_slow_path = false;
  int workers = 1;
  TransverseCoupling coupling = TransverseCoupling::nodal;
};

/**
 * Builds the sweep operator of pencil `p`. Blocks 2l and 2l+1 are the level-l
 * A and B matrices; slow-path blocks follow.
 */
inline PencilOperator build_pencil_operator(const PencilSet& ps, std::size_t p, const LevelMatrices& lm,
                                            const DGBasis& basis, BoundaryMode bc, bool force_slow = false) {
  const int n = basis.size();
  const std::size_t nn = static_cast<std::size_t>(n) * n;
  const std::size_t b = ps.begin(p);
  const auto len = static_cast<std::int64_t>(ps.length(p));
  const double x0 = -ps.radius;
  const double period = 2.0 * ps.radius;

  PencilOperator op;
  op.n = n;
  op.ncells = static_cast<std::size_t>(len);
  op.term_begin.reserve(len + 1);
  op.term_begin.push_back(0);
  op.blocks.resize(2 * lm.levels.size() * nn);
  for (std::size_t l = 0; l < lm.levels.size(); ++l) {
    std::copy_n(lm.levels[l].pair.A.data(), nn, op.blocks.data() + (2 * l) * nn);
    std::copy_n(lm.levels[l].pair.B.data(), nn, op.blocks.data() + (2 * l + 1) * nn);
  }

  // maximal same-level runs
  std::vector<std::int64_t> run_lo(len), run_hi(len);
  for (std::int64_t s = 0; s < len; ++s)
    run_lo[s] = (s > 0 && ps.levels[b + s - 1] == ps.levels[b + s]) ? run_lo[s - 1] : s;
  for (std::int64_t s = len - 1; s >= 0; --s)
    run_hi[s] = (s + 1 < len && ps.levels[b + s + 1] == ps.levels[b + s]) ? run_hi[s + 1] : s;
  const bool single_level = len > 0 && run_lo[len - 1] == 0;

  const auto lowers = std::span<const double>(ps.lowers).subspan(b, len);
  std::vector<double> scratch(3 * n + nn), block(nn);

  auto add_term = [&](std::int64_t src, std::uint32_t blk) {
    op.term_src.push_back(static_cast<std::uint32_t>(src));
    op.term_block.push_back(blk);
  };

  for (std::int64_t s = 0; s < len; ++s) {
    const int level = ps.levels[b + s];
    bool fast = !force_slow && ps.conforming[b + s] && static_cast<std::size_t>(level) < lm.levels.size();
    std::int64_t same = 0, neighbour = 0;
    if (fast) {
      const auto& shift = lm.levels[level].shift;
      same = s - shift.cells;
      neighbour = same - 1;
      if (bc == BoundaryMode::periodic && single_level) {
        same = wrap_index(same, len);
        neighbour = wrap_index(neighbour, len);
      } else {
        // every cell between s and its sources must sit in s's run; with
        // absorbing boundaries the run may instead end at the pencil end
        std::int64_t lo = std::min(neighbour, s), hi = std::max(same, s);
        if (bc == BoundaryMode::absorbing) {
          lo = std::max<std::int64_t>(lo, 0);
          hi = std::min<std::int64_t>(hi, len - 1);
        }
        fast = lo >= run_lo[s] && hi <= run_hi[s];
      }
    }

    if (fast) {
      ++op.fast_cells;
      if (same >= 0 && same < len) add_term(same, static_cast<std::uint32_t>(2 * level));
      if (neighbour >= 0 && neighbour < len) add_term(neighbour, static_cast<std::uint32_t>(2 * level + 1));
    } else {
      ++op.slow_cells;
      const CellExtent dest{lowers[s], ps.widths[b + s]};
      const double foot_lo = dest.lo - lm.displacement;
      const double foot_hi = dest.hi() - lm.displacement;
      std::int64_t m_lo = 0, m_hi = 0;
      if (bc == BoundaryMode::periodic) {
        m_lo = static_cast<std::int64_t>(std::floor((foot_lo - x0) / period));
        m_hi = static_cast<std::int64_t>(std::floor((foot_hi - x0) / period));
      }
      for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const double shift = static_cast<double>(m) * period;
        const double sub_lo = std::max(foot_lo, x0 + shift) - shift;
        const double sub_hi = std::min(foot_hi, x0 + period + shift) - shift;
        if (sub_hi <= sub_lo) continue;
        auto it = std::upper_bound(lowers.begin(), lowers.end(), sub_lo);
        std::int64_t k = std::max<std::int64_t>(0, (it - lowers.begin()) - 1);
        for (; k < len && lowers[k] < sub_hi; ++k) {
          const CellExtent src{lowers[k] + shift, ps.widths[b + k]};
          const double width =
              detail::generalized_block(basis, dest, src, lm.displacement, block.data(), scratch.data());
          if (width <= 0.0) continue;
          const auto blk = static_cast<std::uint32_t>(op.blocks.size() / nn);
          op.blocks.insert(op.blocks.end(), block.begin(), block.end());
          add_term(k, blk);
        }
      }
    }
    op.term_begin.push_back(static_cast<std::uint32_t>(op.term_src.size()));
  }
  return op;
}

/// Sweeps one pencil's packed values. Returns the swept values.
inline std::vector<double> sweep_pencil(const PencilSet& ps, std::size_t p, std::span<const double> values,
                                        const LevelMatrices& lm, const DGBasis& basis, BoundaryMode bc,
                                        bool force_slow = false) {
  if (values.size() != ps.length(p) * basis.size())
    throw std::invalid_argument("sweep_pencil: value count does not match pencil length");
  const PencilOperator op = build_pencil_operator(ps, p, lm, basis, bc, force_slow);
  std::vector<double> out(values.size());
  op.apply(values.data(), out.data());
  return out;
}

/**
 * f_out_c = f_in_c + sum_{pencils P containing c} w_c (f_P_c - f_in_c), with
 * a plain copy when n_c = 1. `f_in` holds `m` values per mesh cell; each
 * pencil result holds `m` values per pencil entry in sweep order.
 */
inline std::vector<double> weighted_writeback(std::span<const double> f_in, const PencilSet& ps,
                                              const std::vector<std::vector<double>>& pencil_results,
                                              std::size_t m) {
  if (pencil_results.size() != ps.n_pencils())
    throw std::invalid_argument("weighted_writeback: one result per pencil required");
  for (std::size_t c = 0; c < ps.pencil_count.size(); ++c)
    if (ps.pencil_count[c] == 0)
      throw std::runtime_error("weighted_writeback: cell " + std::to_string(c) + " has zero total weight");
  std::vector<double> out(f_in.begin(), f_in.end());
  for (std::size_t p = 0; p < ps.n_pencils(); ++p) {
    for (std::size_t k = 0; k < ps.length(p); ++k) {
      const std::size_t e = ps.begin(p) + k;
      const std::size_t c = ps.cell_ids[e];
      for (std::size_t q = 0; q < m; ++q) {
        const double r = pencil_results[p][k * m + q];
        if (ps.pencil_count[c] == 1) out[c * m + q] = r;
        else out[c * m + q] += ps.weights[e] * (r - f_in[c * m + q]);
      }
    }
  }
  return out;
}

/**
 * Transverse restriction R (cell nodal values to sub-interval nodal values)
 * and projection P = M^{-1} S back, for sub-interval [a, b] of cell [lo, lo + h].
 * Summed over a tiling of the cell, P R is the identity.
 */
struct SubIntervalMaps {
  Matrix restrict;
  Matrix project;
};

inline SubIntervalMaps sub_interval_maps(const DGBasis& basis, double lo, double h, double a, double b) {
  const int n = basis.size();
  SubIntervalMaps m{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  auto to_cell = [&](double eta) { return 2.0 * (a + 0.5 * (b - a) * (eta + 1.0) - lo) / h - 1.0; };
  std::vector<double> phi_c(n), phi_s(n);
  for (int i = 0; i < n; ++i) {
    basis.eval_all(to_cell(basis.nodes()[i]), phi_c);
    for (int j = 0; j < n; ++j) m.restrict(i, j) = phi_c[j];
  }
  const QuadratureRule& g = basis.gauss();
  Matrix s = Matrix::Zero(n, n);
  for (std::size_t q = 0; q < g.size(); ++q) {
    basis.eval_all(to_cell(g.nodes[q]), phi_c);
    basis.eval_all(g.nodes[q], phi_s);
    const double w = g.weights[q] * (b - a) / h;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s(i, j) += w * phi_c[i] * phi_s[j];
  }
  m.project = basis.mass_inv() * s;
  return m;
}

namespace detail {

/// Per pencil entry transverse maps; empty for cells that fill their pencil box.
struct TransverseMaps {
  std::vector<std::int32_t> map1, map2;  ///< index into pool, -1 for identity
  std::vector<SubIntervalMaps> pool;
};

inline TransverseMaps transverse_maps(const PencilSet& ps, const VelocitySpace& vs) {
  TransverseMaps tm;
  tm.map1.assign(ps.n_entries(), -1);
  tm.map2.assign(ps.n_entries(), -1);
  if (ps.dim != 3) return tm;
  const auto axes = transverse_axes(ps.direction);
  const double tol = vs.mesh().tolerance();
  std::map<std::array<double, 3>, std::int32_t> seen;
  auto lookup = [&](double lo, double h, double a, double b) -> std::int32_t {
    if (std::abs(a - lo) <= tol && std::abs(b - (lo + h)) <= tol) return -1;
    const std::array<double, 3> key{h, (a - lo) / h, (b - lo) / h};
    auto [it, inserted] = seen.emplace(key, static_cast<std::int32_t>(tm.pool.size()));
    if (inserted) tm.pool.push_back(sub_interval_maps(vs.basis(), 0.0, 1.0, key[1], key[2]));
    return it->second;
  };
  for (std::size_t p = 0; p < ps.n_pencils(); ++p) {
    const auto& box = ps.transverse[p];
    for (std::size_t e = ps.begin(p); e < ps.begin(p) + ps.length(p); ++e) {
      const auto& cell = vs.mesh().cells[ps.cell_ids[e]];
      tm.map1[e] = lookup(cell.lo[axes[0]], cell.h[axes[0]], box[0], box[1]);
      tm.map2[e] = lookup(cell.lo[axes[1]], cell.h[axes[1]], box[2], box[3]);
    }
  }
  return tm;
}

/**
 * out = (M1 (x) M2) in over the two transverse tensor indices of direction d;
 * a null matrix is the identity. `tmp` holds one cell.
 */
inline void transverse_apply(const TensorPermutation& perm, int d, const Matrix* m1, const Matrix* m2,
                             const double* in, double* out, double* tmp) {
  const int n = perm.degree() + 1;
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 < n; ++t2) {
      const auto dst = perm.line(d, t1, t2);
      for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        if (m2) {
          for (int u = 0; u < n; ++u) acc += (*m2)(t2, u) * in[perm.line(d, t1, u)[s]];
        } else {
          acc = in[perm.line(d, t1, t2)[s]];
        }
        tmp[dst[s]] = acc;
      }
    }
  for (int t1 = 0; t1 < n; ++t1)
    for (int t2 = 0; t2 < n; ++t2) {
      const auto dst = perm.line(d, t1, t2);
      for (int s = 0; s < n; ++s) {
        double acc = 0.0;
        if (m1) {
          for (int u = 0; u < n; ++u) acc += (*m1)(t1, u) * tmp[perm.line(d, u, t2)[s]];
        } else {
          acc = tmp[perm.line(d, t1, t2)[s]];
        }
        out[dst[s]] = acc;
      }
    }
}

}  // namespace detail

/**
 * Velocity advection by E(x) along axis d for one time step: every x DOF ix
 * is swept independently with speed E[ix]. Zero-speed x DOFs are skipped.
 * Each worker owns whole x DOFs, so results do not depend on worker count.
 */
inline void advect_velocity(DistributionField& f, std::span<const double> speed, double dt, const PencilSet& ps,
                            const VelocitySpace& vs, BoundaryMode bc, const SweepOptions& opt = {}) {
  const DGBasis& basis = vs.basis();
  const TensorPermutation& perm = vs.permutation();
  const int n = basis.size();
  const int nt = perm.transverse_size();
  const int d = ps.direction;
  const std::size_t ndof = vs.dofs_per_cell();
  const std::size_t nv = f.nv;
  const std::size_t nx = f.nx;
  if (speed.size() != nx) throw std::invalid_argument("advect_velocity: speed size must equal N_x^DOF");
  if (nv != vs.size()) throw std::invalid_argument("advect_velocity: field does not match velocity space");

  std::size_t longest = 0;
  for (std::size_t p = 0; p < ps.n_pencils(); ++p) longest = std::max(longest, ps.length(p));
  const std::size_t nshapes = ps.shape_representative.size();
  if (nshapes == 0 && ps.n_pencils() > 0) throw std::runtime_error("advect_velocity: pencils not classified");
  const bool projected = opt.coupling == TransverseCoupling::projected && ps.dim == 3;
  const detail::TransverseMaps tm = projected ? detail::transverse_maps(ps, vs) : detail::TransverseMaps{};
  auto map_of = [&](std::int32_t i, bool restrict) -> const Matrix* {
    if (i < 0) return nullptr;
    return restrict ? &tm.pool[i].restrict : &tm.pool[i].project;
  };

#pragma omp parallel num_threads(std::max(1, opt.workers))
  {
    std::vector<double> g(nv), out(nv), line_in(longest * n), line_out(longest * n);
    std::vector<double> src(longest * ndof), res(longest * ndof), tmp(ndof), proj(ndof);
    std::vector<PencilOperator> ops(nshapes);
#pragma omp for schedule(static)
    for (std::int64_t ixs = 0; ixs < static_cast<std::int64_t>(nx); ++ixs) {
      const auto ix = static_cast<std::size_t>(ixs);
      const double a = speed[ix];
      if (a == 0.0) continue;
      const LevelMatrices lm = precompute_level_matrices(basis, a * dt, vs.mesh());
      for (std::size_t sh = 0; sh < nshapes; ++sh)
        ops[sh] = build_pencil_operator(ps, ps.shape_representative[sh], lm, basis, bc, opt.force_slow_path);

      for (std::size_t iv = 0; iv < nv; ++iv) g[iv] = f.values[iv * nx + ix];
      out = g;
      if (projected)
        for (std::size_t c = 0; c < ps.pencil_count.size(); ++c)
          if (ps.pencil_count[c] > 1) std::fill_n(out.data() + c * ndof, ndof, 0.0);

      for (std::size_t p = 0; p < ps.n_pencils(); ++p) {
        const PencilOperator& op = ops[ps.shape[p]];
        const std::size_t b = ps.begin(p);
        const std::size_t len = ps.length(p);
        for (std::size_t k = 0; k < len; ++k) {
          const double* cell = g.data() + ps.cell_ids[b + k] * ndof;
          if (projected && (tm.map1[b + k] >= 0 || tm.map2[b + k] >= 0))
            detail::transverse_apply(perm, d, map_of(tm.map1[b + k], true), map_of(tm.map2[b + k], true), cell,
                                     src.data() + k * ndof, tmp.data());
          else
            std::copy_n(cell, ndof, src.data() + k * ndof);
        }
        for (int t1 = 0; t1 < nt; ++t1)
          for (int t2 = 0; t2 < nt; ++t2) {
            const auto line = perm.line(d, t1, t2);
            for (std::size_t k = 0; k < len; ++k)
              for (int q = 0; q < n; ++q) line_in[k * n + q] = src[k * ndof + line[q]];
            op.apply(line_in.data(), line_out.data());
            for (std::size_t k = 0; k < len; ++k)
              for (int q = 0; q < n; ++q) res[k * ndof + line[q]] = line_out[k * n + q];
          }
        for (std::size_t k = 0; k < len; ++k) {
          const std::size_t c = ps.cell_ids[b + k];
          double* dst = out.data() + c * ndof;
          const double* r = res.data() + k * ndof;
          if (ps.pencil_count[c] == 1) {
            std::copy_n(r, ndof, dst);
          } else if (projected) {
            detail::transverse_apply(perm, d, map_of(tm.map1[b + k], false), map_of(tm.map2[b + k], false), r,
                                     proj.data(), tmp.data());
            for (std::size_t q = 0; q < ndof; ++q) dst[q] += proj[q];
          } else {
            const double w = ps.weights[b + k];
            const double* in = g.data() + c * ndof;
            for (std::size_t q = 0; q < ndof; ++q) dst[q] += w * (r[q] - in[q]);
          }
        }
      }
      for (std::size_t iv = 0; iv < nv; ++iv) f.values[iv * nx + ix] = out[iv];
    }
  }
}

}  // namespace sldg
