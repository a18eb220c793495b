#pragma once

/**
 * @file pencil.hpp
 * @brief CSR pencil decomposition of a velocity mesh along one axis.
 *
 * A pencil is the gap-free line of cells covering one cell of the transverse
 * interval grid, which is the Cartesian product of all distinct transverse
 * cell edges. A coarse cell spanning several transverse intervals belongs to
 * several pencils and carries a transverse weight in each.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "sldg/sldg1d.hpp"
#include "sldg/vmesh.hpp"

namespace sldg {

/// How a multi-pencil cell's results are averaged at write-back.
enum class PencilWeighting {
  uniform,  ///< w_c = 1/n_c
  area,     ///< w_c = transverse interval area / cell transverse area
};

struct PencilSet {
  int direction = 0;
  int dim = 3;
  double radius = 0.0;
  std::vector<std::size_t> offsets{0};  ///< CSR row pointers, one row per pencil
  std::vector<std::size_t> cell_ids;
  std::vector<double> lowers;           ///< sweep-axis lower bound per entry
  std::vector<double> widths;           ///< sweep-axis width per entry
  std::vector<int> levels;
  std::vector<double> weights;
  std::vector<std::uint8_t> conforming;
  /// Transverse box of each pencil: {lo_t1, hi_t1, lo_t2, hi_t2}.
  std::vector<std::array<double, 4>> transverse;
  /// n_c: number of pencils containing each mesh cell.
  std::vector<int> pencil_count;
  /// Pencils with identical sweep geometry and classification share a shape id.
  std::vector<std::size_t> shape;
  std::vector<std::size_t> shape_representative;

  std::size_t n_pencils() const { return offsets.size() - 1; }
  std::size_t length(std::size_t p) const { return offsets[p + 1] - offsets[p]; }
  std::size_t begin(std::size_t p) const { return offsets[p]; }
  std::size_t n_entries() const { return cell_ids.size(); }
};

/// The two transverse axes of sweep direction d (ascending).
inline std::array<int, 2> transverse_axes(int d) {
  switch (d) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
  }
}

namespace detail {

inline std::vector<double> unique_edges(const VelocityMesh& mesh, int axis) {
  std::vector<double> e;
  for (const auto& c : mesh.cells) {
    e.push_back(c.lo[axis]);
    e.push_back(c.hi(axis));
  }
  std::sort(e.begin(), e.end());
  const double tol = mesh.tolerance();
  std::vector<double> out;
  for (double x : e)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

}  // namespace detail

/**
 * Extracts all pencils along direction d. Fails with a structural error if
 * any pencil has a gap or overlap, or does not span [-R, R].
 */
inline PencilSet extract_pencils(const VelocityMesh& mesh, int d,
                                 PencilWeighting weighting = PencilWeighting::uniform) {
  if (d < 0 || d >= mesh.dim) throw std::invalid_argument("extract_pencils: direction out of range");
  PencilSet ps;
  ps.direction = d;
  ps.dim = mesh.dim;
  ps.radius = mesh.radius;
  ps.pencil_count.assign(mesh.size(), 0);
  const double tol = mesh.tolerance();

  std::vector<std::array<double, 4>> boxes;
  std::array<int, 2> axes{-1, -1};
  if (mesh.dim == 1) {
    boxes.push_back({0.0, 1.0, 0.0, 1.0});
  } else {
    axes = transverse_axes(d);
    const auto e1 = detail::unique_edges(mesh, axes[0]);
    const auto e2 = detail::unique_edges(mesh, axes[1]);
    for (std::size_t a = 0; a + 1 < e1.size(); ++a)
      for (std::size_t b = 0; b + 1 < e2.size(); ++b) boxes.push_back({e1[a], e1[a + 1], e2[b], e2[b + 1]});
  }

  std::vector<std::size_t> members;
  for (std::size_t p = 0; p < boxes.size(); ++p) {
    const auto& box = boxes[p];
    members.clear();
    for (std::size_t c = 0; c < mesh.size(); ++c) {
      const auto& cell = mesh.cells[c];
      bool covers = true;
      if (mesh.dim == 3) {
        covers = cell.lo[axes[0]] <= box[0] + tol && cell.hi(axes[0]) >= box[1] - tol &&
                 cell.lo[axes[1]] <= box[2] + tol && cell.hi(axes[1]) >= box[3] - tol;
      }
      if (covers) members.push_back(c);
    }
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return mesh.cells[a].lo[d] < mesh.cells[b].lo[d]; });

    double expected = -mesh.radius;
    for (std::size_t c : members) {
      const auto& cell = mesh.cells[c];
      if (std::abs(cell.lo[d] - expected) > tol) {
        std::ostringstream msg;
        msg << "extract_pencils: pencil " << p << " in direction " << d << " has a "
            << (cell.lo[d] > expected ? "gap" : "overlap") << " at coordinate " << expected;
        throw std::runtime_error(msg.str());
      }
      expected = cell.hi(d);
      ps.cell_ids.push_back(c);
      ps.lowers.push_back(cell.lo[d]);
      ps.widths.push_back(cell.h[d]);
      ps.levels.push_back(cell.level);
      ++ps.pencil_count[c];
    }
    if (members.empty() || std::abs(expected - mesh.radius) > tol) {
      std::ostringstream msg;
      msg << "extract_pencils: pencil " << p << " in direction " << d << " ends at " << expected
          << " instead of " << mesh.radius;
      throw std::runtime_error(msg.str());
    }
    ps.offsets.push_back(ps.cell_ids.size());
    ps.transverse.push_back(box);
  }

  ps.weights.resize(ps.n_entries());
  for (std::size_t p = 0; p < ps.n_pencils(); ++p) {
    const auto& box = ps.transverse[p];
    for (std::size_t e = ps.begin(p); e < ps.offsets[p + 1]; ++e) {
      const std::size_t c = ps.cell_ids[e];
      if (weighting == PencilWeighting::area && mesh.dim == 3) {
        const auto& cell = mesh.cells[c];
        ps.weights[e] = ((box[1] - box[0]) * (box[3] - box[2])) / (cell.h[axes[0]] * cell.h[axes[1]]);
      } else {
        ps.weights[e] = 1.0 / ps.pencil_count[c];
      }
    }
  }
  ps.conforming.assign(ps.n_entries(), 0);
  return ps;
}

/**
 * Marks an entry conforming iff every pencil neighbour within +-2 positions
 * has its level. Past the pencil ends, absorbing boundaries count as same
 * level and periodic boundaries wrap. Single-cell pencils are never
 * conforming. Also groups pencils by shape.
 */
inline void classify_conforming(PencilSet& ps, const VelocityMesh& /*mesh*/, BoundaryMode bc) {
  for (std::size_t p = 0; p < ps.n_pencils(); ++p) {
    const auto n = static_cast<std::int64_t>(ps.length(p));
    const std::size_t b = ps.begin(p);
    for (std::int64_t s = 0; s < n; ++s) {
      bool ok = n > 1;
      for (std::int64_t k = -2; k <= 2 && ok; ++k) {
        std::int64_t q = s + k;
        if (q < 0 || q >= n) {
          if (bc == BoundaryMode::absorbing) continue;
          q = wrap_index(q, n);
        }
        ok = ps.levels[b + q] == ps.levels[b + s];
      }
      ps.conforming[b + s] = ok ? 1 : 0;
    }
  }

  using Key = std::vector<double>;
  std::map<Key, std::size_t> seen;
  ps.shape.assign(ps.n_pencils(), 0);
  ps.shape_representative.clear();
  for (std::size_t p = 0; p < ps.n_pencils(); ++p) {
    Key key;
    for (std::size_t e = ps.begin(p); e < ps.offsets[p + 1]; ++e) {
      key.push_back(ps.lowers[e]);
      key.push_back(ps.widths[e]);
      key.push_back(ps.levels[e]);
      key.push_back(ps.conforming[e]);
    }
    auto [it, inserted] = seen.emplace(std::move(key), ps.shape_representative.size());
    if (inserted) ps.shape_representative.push_back(p);
    ps.shape[p] = it->second;
  }
}

inline PencilSet build_pencils(const VelocityMesh& mesh, int d, BoundaryMode bc,
                               PencilWeighting weighting = PencilWeighting::uniform) {
  PencilSet ps = extract_pencils(mesh, d, weighting);
  classify_conforming(ps, mesh, bc);
  return ps;
}

inline void write_pencils_csv(const PencilSet& ps, std::ostream& os) {
  os << "pencil,cell,lower,width,weight,conforming\n";
  os.precision(17);
  for (std::size_t p = 0; p < ps.n_pencils(); ++p)
    for (std::size_t e = ps.begin(p); e < ps.offsets[p + 1]; ++e)
      os << p << ',' << ps.cell_ids[e] << ',' << ps.lowers[e] << ',' << ps.widths[e] << ',' << ps.weights[e]
         << ',' << int(ps.conforming[e]) << '\n';
}

}  // namespace sldg
