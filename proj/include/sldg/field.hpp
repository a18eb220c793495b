#pragma once

/**
 * @file field.hpp
 * @brief Velocity DOF space (mesh + basis + tensor map) and the phase-space
 * distribution storage f[iv * N_x^DOF + ix].
 */

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "sldg/basis.hpp"
#include "sldg/tensor.hpp"
#include "sldg/vmesh.hpp"

namespace sldg {

/// Velocity DOFs iv = cell * (p+1)^d + b with coordinates and quadrature weights.
class VelocitySpace {
 public:
  VelocitySpace(VelocityMesh mesh, int degree)
      : mesh_(std::move(mesh)), basis_(degree), perm_(build_permutation(basis_, mesh_.dim)) {
    dofs_per_cell_ = perm_.dofs();
    const std::size_t ndof = mesh_.size() * dofs_per_cell_;
    coords_.resize(ndof);
    weights_.resize(ndof);
    for (std::size_t c = 0; c < mesh_.size(); ++c) {
      const auto& cell = mesh_.cells[c];
      for (std::size_t b = 0; b < dofs_per_cell_; ++b) {
        const auto& ijk = perm_.index(b);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        double w = 1.0;
        for (int d = 0; d < mesh_.dim; ++d) {
          x[d] = cell.lo[d] + 0.5 * cell.h[d] * (basis_.nodes()[ijk[d]] + 1.0);
          w *= 0.5 * cell.h[d] * basis_.weights()[ijk[d]];
        }
        coords_[c * dofs_per_cell_ + b] = x;
        weights_[c * dofs_per_cell_ + b] = w;
      }
    }
  }

  const VelocityMesh& mesh() const { return mesh_; }
  const DGBasis& basis() const { return basis_; }
  const TensorPermutation& permutation() const { return perm_; }
  int dim() const { return mesh_.dim; }
  std::size_t dofs_per_cell() const { return dofs_per_cell_; }
  std::size_t size() const { return coords_.size(); }
  const std::array<double, 3>& coord(std::size_t iv) const { return coords_[iv]; }
  std::span<const double> weights() const { return weights_; }

 private:
  VelocityMesh mesh_;
  DGBasis basis_;
  TensorPermutation perm_;
  std::size_t dofs_per_cell_ = 0;
  std::vector<std::array<double, 3>> coords_;
  std::vector<double> weights_;
};

/// Velocity-major phase-space values.
struct DistributionField {
  std::size_t nv = 0;
  std::size_t nx = 0;
  std::vector<double> values;

  DistributionField() = default;
  DistributionField(std::size_t velocity_dofs, std::size_t space_dofs)
      : nv(velocity_dofs), nx(space_dofs), values(velocity_dofs * space_dofs, 0.0) {}

  double& operator()(std::size_t iv, std::size_t ix) { return values[iv * nx + ix]; }
  double operator()(std::size_t iv, std::size_t ix) const { return values[iv * nx + ix]; }
  std::span<double> row(std::size_t iv) { return {values.data() + iv * nx, nx}; }
  std::span<const double> row(std::size_t iv) const { return {values.data() + iv * nx, nx}; }
};

}  // namespace sldg
