#pragma once

/**
 * @file vmesh.hpp
 * @brief Adaptively refined velocity mesh on [-R,R]^d, d in {1,3}.
 *
 * The mesh starts as a uniform N_b^d grid; each refinement pass splits the
 * marked cells of the current finest level into 2^d children. Geometry is kept
 * explicitly per cell (no tree survives construction).
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sldg {

struct VelocityCell {
  int level = 0;
  std::array<double, 3> lo{0.0, 0.0, 0.0};
  std::array<double, 3> h{1.0, 1.0, 1.0};

  double hi(int d) const { return lo[d] + h[d]; }
};

struct VelocityMesh {
  int dim = 3;
  double radius = 6.0;
  int base_cells = 4;
  int max_level = 0;
  std::vector<VelocityCell> cells;

  std::size_t size() const { return cells.size(); }
  double base_width() const { return 2.0 * radius / base_cells; }
  double level_width(int level) const { return std::ldexp(base_width(), -level); }
  /// Geometric tolerance for coordinate comparisons.
  double tolerance() const { return 1e-9 * base_width(); }
  int finest_level() const {
    int l = 0;
    for (const auto& c : cells) l = std::max(l, c.level);
    return l;
  }
};

/// Decides whether `cell` (at level target_level - 1) is split in the pass that creates target_level.
using RefinementMarker = std::function<bool(const VelocityCell& cell, int target_level, const VelocityMesh& mesh)>;

/**
 * Refines every current-finest cell whose closed box contains the origin.
 * For even N_b this is the 2^d cells meeting at the origin; for odd N_b the
 * first pass picks the single cell containing it.
 */
inline RefinementMarker origin_marker() {
  return [](const VelocityCell& cell, int target_level, const VelocityMesh& mesh) {
    if (cell.level != target_level - 1) return false;
    const double tol = mesh.tolerance();
    for (int d = 0; d < mesh.dim; ++d)
      if (cell.lo[d] > tol || cell.hi(d) < -tol) return false;
    return true;
  };
}

namespace detail {

inline std::vector<VelocityCell> split(const VelocityCell& parent, int dim) {
  std::vector<VelocityCell> kids;
  const int nkids = 1 << dim;
  for (int k = 0; k < nkids; ++k) {
    VelocityCell c = parent;
    c.level = parent.level + 1;
    for (int d = 0; d < dim; ++d) {
      c.h[d] = 0.5 * parent.h[d];
      c.lo[d] = parent.lo[d] + ((k >> d) & 1) * c.h[d];
    }
    kids.push_back(c);
  }
  return kids;
}

/// True when a and b share a face of positive measure.
inline bool face_adjacent(const VelocityCell& a, const VelocityCell& b, int dim, double tol) {
  int touching = 0;
  for (int d = 0; d < dim; ++d) {
    const double overlap = std::min(a.hi(d), b.hi(d)) - std::max(a.lo[d], b.lo[d]);
    if (std::abs(overlap) <= tol) ++touching;
    else if (overlap < 0.0) return false;
  }
  return touching == 1;
}

inline void refine_marked(VelocityMesh& mesh, const std::vector<char>& marked) {
  std::vector<VelocityCell> next;
  next.reserve(mesh.cells.size() + (1u << mesh.dim) * marked.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (marked[c]) {
      for (auto& kid : split(mesh.cells[c], mesh.dim)) next.push_back(kid);
    } else {
      next.push_back(mesh.cells[c]);
    }
  }
  mesh.cells = std::move(next);
}

}  // namespace detail

/// Face-adjacent pairs that differ by more than one level.
inline std::vector<std::pair<std::size_t, std::size_t>> balance_violations(const VelocityMesh& mesh) {
  std::vector<std::pair<std::size_t, std::size_t>> bad;
  const double tol = mesh.tolerance();
  for (std::size_t a = 0; a < mesh.cells.size(); ++a)
    for (std::size_t b = a + 1; b < mesh.cells.size(); ++b)
      if (std::abs(mesh.cells[a].level - mesh.cells[b].level) > 1 &&
          detail::face_adjacent(mesh.cells[a], mesh.cells[b], mesh.dim, tol))
        bad.emplace_back(a, b);
  return bad;
}

/**
 * Builds the refined mesh. After each pass any 2:1 violation is repaired by
 * splitting the coarser cell of the offending pair.
 */
inline VelocityMesh build_mesh(int dim, int base_cells, int levels, double radius,
                               const RefinementMarker& marker = origin_marker()) {
  if (dim != 1 && dim != 3) throw std::invalid_argument("build_mesh: velocity dimension must be 1 or 3");
  if (base_cells < 2) throw std::invalid_argument("build_mesh: N_b must be >= 2, got " + std::to_string(base_cells));
  if (levels < 0 || levels > 3) throw std::invalid_argument("build_mesh: refinement levels must lie in [0,3]");
  if (!(radius > 0.0)) throw std::invalid_argument("build_mesh: radius must be positive");

  VelocityMesh mesh;
  mesh.dim = dim;
  mesh.radius = radius;
  mesh.base_cells = base_cells;
  mesh.max_level = levels;

  const double h0 = mesh.base_width();
  const int ny = dim == 3 ? base_cells : 1;
  const int nz = dim == 3 ? base_cells : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < base_cells; ++i) {
        VelocityCell c;
        c.level = 0;
        const std::array<int, 3> idx{i, j, k};
        for (int d = 0; d < dim; ++d) {
          c.lo[d] = -radius + idx[d] * h0;
          c.h[d] = h0;
        }
        mesh.cells.push_back(c);
      }

  for (int level = 1; level <= levels; ++level) {
    std::vector<char> marked(mesh.cells.size(), 0);
    for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
      if (marker(mesh.cells[c], level, mesh)) {
        if (mesh.cells[c].level >= levels)
          throw std::invalid_argument("build_mesh: marker selected a cell already at the maximum level");
        marked[c] = 1;
      }
    }
    detail::refine_marked(mesh, marked);

    for (int iter = 0;; ++iter) {
      const auto bad = balance_violations(mesh);
      if (bad.empty()) break;
      if (iter > 4 * levels + 8) throw std::runtime_error("build_mesh: 2:1 balance could not be restored");
      std::vector<char> fix(mesh.cells.size(), 0);
      for (const auto& [a, b] : bad) fix[mesh.cells[a].level < mesh.cells[b].level ? a : b] = 1;
      detail::refine_marked(mesh, fix);
    }
  }
  return mesh;
}

/// Integration points (nodal DOFs) of a degree-p tensor basis on the mesh.
inline std::size_t ip_count(const VelocityMesh& mesh, int p) {
  std::size_t per_cell = 1;
  for (int d = 0; d < mesh.dim; ++d) per_cell *= static_cast<std::size_t>(p + 1);
  return mesh.cells.size() * per_cell;
}

inline void write_mesh_csv(const VelocityMesh& mesh, std::ostream& os) {
  os << "cell,level,lo0,lo1,lo2,h0,h1,h2\n";
  os.precision(17);
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const auto& cell = mesh.cells[c];
    os << c << ',' << cell.level;
    for (int d = 0; d < 3; ++d) os << ',' << (d < mesh.dim ? cell.lo[d] : 0.0);
    for (int d = 0; d < 3; ++d) os << ',' << (d < mesh.dim ? cell.h[d] : 0.0);
    os << '\n';
  }
}

}  // namespace sldg
