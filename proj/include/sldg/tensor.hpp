#pragma once

/**
 * @file tensor.hpp
 * @brief (i,j,k) factorisation of cell-local DOFs for tensor-product nodal
 * elements, and O(p+1) pack/scatter of the 1D lines used by the sweeps.
 */

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sldg/basis.hpp"

namespace sldg {

class TensorPermutation {
 public:
  TensorPermutation(int degree, int dim, std::vector<std::array<int, 3>> forward)
      : degree_(degree), dim_(dim), forward_(std::move(forward)) {
    const int n = degree_ + 1;
    const std::size_t ndof = forward_.size();
    std::vector<int> inverse(ndof, -1);
    for (std::size_t b = 0; b < ndof; ++b) {
      const auto& ijk = forward_[b];
      const int flat = ijk[0] + n * (ijk[1] + n * ijk[2]);
      if (flat < 0 || static_cast<std::size_t>(flat) >= ndof || inverse[flat] != -1)
        throw std::runtime_error("TensorPermutation: forward map is not a bijection");
      inverse[flat] = static_cast<int>(b);
    }
    const int nt = dim_ == 3 ? n : 1;
    lines_.resize(static_cast<std::size_t>(dim_) * nt * nt * n);
    for (int d = 0; d < dim_; ++d)
      for (int t1 = 0; t1 < nt; ++t1)
        for (int t2 = 0; t2 < nt; ++t2)
          for (int s = 0; s < n; ++s) {
            std::array<int, 3> ijk{0, 0, 0};
            ijk[d] = s;
            if (dim_ == 3) {
              const int a1 = d == 0 ? 1 : 0;
              const int a2 = d == 2 ? 1 : 2;
              ijk[a1] = t1;
              ijk[a2] = t2;
            }
            lines_[line_offset(d, t1, t2) + s] = inverse[ijk[0] + n * (ijk[1] + n * ijk[2])];
          }
  }

  int degree() const { return degree_; }
  int dim() const { return dim_; }
  std::size_t dofs() const { return forward_.size(); }
  /// Transverse index range per axis (p+1 in 3V, 1 in 1V).
  int transverse_size() const { return dim_ == 3 ? degree_ + 1 : 1; }
  const std::array<int, 3>& index(std::size_t b) const { return forward_[b]; }

  /// Cell-local DOFs along direction d at transverse indices (t1, t2), by sweep index.
  std::span<const int> line(int d, int t1, int t2) const {
    return {lines_.data() + line_offset(d, t1, t2), static_cast<std::size_t>(degree_ + 1)};
  }

 private:
  std::size_t line_offset(int d, int t1, int t2) const {
    const int n = degree_ + 1;
    const int nt = transverse_size();
    return ((static_cast<std::size_t>(d) * nt + t1) * nt + t2) * n;
  }

  int degree_;
  int dim_;
  std::vector<std::array<int, 3>> forward_;
  std::vector<int> lines_;
};

/**
 * Recovers the (i,j,k) index of every DOF b by tabulating phi(b, xi) on the
 * GLL grid: b must equal 1 at exactly one grid point and vanish at the rest.
 * `phi` is any callable (std::size_t b, std::array<double,3> xi) -> double.
 */
template <class BasisFunction>
TensorPermutation discover_permutation(const DGBasis& basis, int dim, std::size_t ndof, BasisFunction&& phi) {
  if (dim != 1 && dim != 3) throw std::invalid_argument("discover_permutation: dimension must be 1 or 3");
  const int n = basis.size();
  const int nj = dim == 3 ? n : 1;
  const auto nodes = basis.nodes();
  std::vector<std::array<int, 3>> forward(ndof);
  for (std::size_t b = 0; b < ndof; ++b) {
    int hits = 0;
    for (int k = 0; k < nj; ++k)
      for (int j = 0; j < nj; ++j)
        for (int i = 0; i < n; ++i) {
          const std::array<double, 3> xi{nodes[i], dim == 3 ? nodes[j] : 0.0, dim == 3 ? nodes[k] : 0.0};
          const double v = phi(b, xi);
          if (std::abs(v - 1.0) <= 1e-8) {
            forward[b] = {i, j, k};
            ++hits;
          } else if (std::abs(v) > 1e-8) {
            hits = -1000;
          }
        }
    if (hits != 1)
      throw std::runtime_error("discover_permutation: DOF " + std::to_string(b) +
                               " has no unique nodal grid point (basis not tensor-product nodal)");
  }
  return TensorPermutation(basis.degree(), dim, std::move(forward));
}

/// Native DOF order b = i + (p+1) j + (p+1)^2 k, checked by discovery.
inline TensorPermutation build_permutation(const DGBasis& basis, int dim) {
  const int n = basis.size();
  const std::size_t ndof = dim == 3 ? static_cast<std::size_t>(n) * n * n : n;
  auto native = [&](std::size_t b, const std::array<double, 3>& xi) {
    const int i = static_cast<int>(b % n);
    double v = basis.eval(i, xi[0]);
    if (dim == 3) {
      const int j = static_cast<int>((b / n) % n);
      const int k = static_cast<int>(b / (static_cast<std::size_t>(n) * n));
      v *= basis.eval(j, xi[1]) * basis.eval(k, xi[2]);
    }
    return v;
  };
  return discover_permutation(basis, dim, ndof, native);
}

inline void pack_line(std::span<const double> cell_values, const TensorPermutation& perm, int d, int t1, int t2,
                      std::span<double> out) {
  const auto ids = perm.line(d, t1, t2);
  for (std::size_t s = 0; s < ids.size(); ++s) out[s] = cell_values[ids[s]];
}

inline void scatter_line(std::span<const double> line, const TensorPermutation& perm, int d, int t1, int t2,
                         std::span<double> cell_values) {
  const auto ids = perm.line(d, t1, t2);
  for (std::size_t s = 0; s < ids.size(); ++s) cell_values[ids[s]] = line[s];
}

}  // namespace sldg
