#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sldg/sldg1d.hpp"

using namespace sldg;

namespace {

// Columns of A and B recovered from the oracle by projecting unit data.
std::pair<Matrix, Matrix> oracle_pair(const DGBasis& basis, double alpha) {
  const int n = basis.size();
  Matrix A(n, n), B(n, n);
  for (int j = 0; j < n; ++j) {
    std::vector<double> same(3 * n, 0.0), neighbour(3 * n, 0.0);
    same[1 * n + j] = 1.0;
    neighbour[0 * n + j] = 1.0;
    const auto ra = oracle::projection_oracle(same, alpha, 1.0, basis);
    const auto rb = oracle::projection_oracle(neighbour, alpha, 1.0, basis);
    for (int i = 0; i < n; ++i) {
      A(i, j) = ra[1 * n + i];
      B(i, j) = rb[1 * n + i];
    }
  }
  return {A, B};
}

double partition_violation(const DGBasis& basis, const OverlapPair& pair) {
  double worst = 0.0;
  for (int j = 0; j < basis.size(); ++j) {
    double s = 0.0;
    for (int i = 0; i < basis.size(); ++i) s += basis.weights()[i] * (pair.A(i, j) + pair.B(i, j));
    worst = std::max(worst, std::abs(s - basis.weights()[j]));
  }
  return worst;
}

}  // namespace

TEST(DecomposeShift, FloorAndFraction) {
  auto s = decompose_shift(2.3, 1.0, 1.0);
  EXPECT_EQ(s.cells, 2);
  EXPECT_NEAR(s.alpha, 0.3, 1e-15);

  s = decompose_shift(-0.25, 1.0, 1.0);
  EXPECT_EQ(s.cells, -1);
  EXPECT_EQ(s.alpha, 0.75);

  s = decompose_shift(0.0, 0.1, 3.0);
  EXPECT_EQ(s.cells, 0);
  EXPECT_EQ(s.alpha, 0.0);
}

TEST(DecomposeShift, ConsistencyForRandomSpeeds) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int t = 0; t < 1000; ++t) {
    const double a = u(rng);
    const auto s = decompose_shift(a, 0.1, 0.37);
    EXPECT_GE(s.alpha, 0.0);
    EXPECT_LT(s.alpha, 1.0);
    EXPECT_NEAR(static_cast<double>(s.cells) + s.alpha, a * 0.1 / 0.37, 1e-13);
  }
}

TEST(DecomposeShift, FoldsAlphaNearOne) {
  const auto s = decompose_cells(std::nextafter(3.0, 0.0));
  EXPECT_EQ(s.cells, 3);
  EXPECT_EQ(s.alpha, 0.0);
}

TEST(DecomposeShift, RejectsBadArguments) {
  EXPECT_THROW(decompose_shift(1.0, 0.1, 0.0), std::invalid_argument);
  EXPECT_THROW(decompose_shift(1.0, 0.1, -1.0), std::invalid_argument);
  EXPECT_THROW(decompose_shift(1.0, 0.0, 1.0), std::invalid_argument);
}

TEST(OverlapPair, ZeroShiftIsIdentity) {
  for (int p = 1; p <= 5; ++p) {
    const DGBasis basis(p);
    const auto pair = overlap_pair(basis, 0.0);
    EXPECT_EQ((pair.A - Matrix::Identity(p + 1, p + 1)).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(pair.B.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(OverlapPair, RejectsAlphaOutsideUnitInterval) {
  const DGBasis basis(2);
  EXPECT_THROW(overlap_pair(basis, 1.0), std::invalid_argument);
  EXPECT_THROW(overlap_pair(basis, -0.1), std::invalid_argument);
}

TEST(OverlapPair, PartitionOfUnity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int p = 1; p <= 5; ++p) {
    const DGBasis basis(p);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) worst = std::max(worst, partition_violation(basis, overlap_pair(basis, u(rng))));
    EXPECT_LT(worst, 1e-12) << "p=" << p;
  }
}

TEST(OverlapPair, MatchesProjectionOracle) {
  const DGBasis basis(3);
  const auto pair = overlap_pair(basis, 0.3);
  const auto [A, B] = oracle_pair(basis, 0.3);
  EXPECT_LE((pair.A - A).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((pair.B - B).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyUpdate, AdvectsGlobalPolynomialsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> shift_dist(-3.0, 3.0), c(-1.0, 1.0);
  const int ncells = 16;
  const double h = 0.5;
  for (int p = 1; p <= 5; ++p) {
    const DGBasis basis(p);
    const int n = basis.size();
    std::vector<double> coeffs(p + 1);
    for (auto& x : coeffs) x = c(rng);
    const double length = ncells * h;
    auto poly = [&](double x) {
      double v = 0.0;
      for (int k = p; k >= 0; --k) v = v * (x / length) + coeffs[k];
      return v;
    };
    std::vector<double> u(ncells * n);
    for (int i = 0; i < ncells; ++i)
      for (int j = 0; j < n; ++j) u[i * n + j] = poly((i + 0.5 * (basis.nodes()[j] + 1.0)) * h);

    for (int t = 0; t < 37; ++t) {
      const double d = shift_dist(rng);
      const auto s = decompose_cells(d / h);
      const auto out = apply_update(u, s, overlap_pair(basis, s.alpha), BoundaryMode::periodic);
      for (int i = 0; i < ncells; ++i) {
        // only cells whose two sources do not wrap see the global polynomial
        const auto src = i - s.cells;
        if (src - 1 < 0 || src >= ncells) continue;
        for (int j = 0; j < n; ++j) {
          const double x = (i + 0.5 * (basis.nodes()[j] + 1.0)) * h;
          EXPECT_NEAR(out[i * n + j], poly(x - d), 1e-12) << "p=" << p << " shift=" << d;
        }
      }
    }
  }
}

TEST(ApplyUpdate, ConservesMassPeriodic) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> shift_dist(-20.0, 20.0);
  for (int p = 1; p <= 5; ++p) {
    const DGBasis basis(p);
    const auto u = oracle::random_values(10 * basis.size(), rng, 0.0, 1.0);
    const double m0 = pencil_mass(u, basis, 0.2);
    for (int t = 0; t < 20; ++t) {
      const auto s = decompose_cells(shift_dist(rng));
      const auto out = apply_update(u, s, overlap_pair(basis, s.alpha), BoundaryMode::periodic);
      EXPECT_NEAR(pencil_mass(out, basis, 0.2), m0, 1e-13 * m0);
    }
  }
}

TEST(ApplyUpdate, FullWrapLeavesDataUnchanged) {
  const DGBasis basis(3);
  std::mt19937_64 rng(9);
  const auto u = oracle::random_values(12 * 4, rng);
  const auto out = apply_update(u, ShiftDecomposition{12, 0.0}, overlap_pair(basis, 0.0), BoundaryMode::periodic);
  EXPECT_EQ(out, u);
}

TEST(ApplyUpdate, AbsorbingDropsInflow) {
  const DGBasis basis(2);
  std::vector<double> u(5 * 3, 1.0);
  const auto out = apply_update(u, ShiftDecomposition{1, 0.0}, overlap_pair(basis, 0.0), BoundaryMode::absorbing);
  for (int j = 0; j < 3; ++j) EXPECT_EQ(out[j], 0.0);
  for (int j = 3; j < 15; ++j) EXPECT_EQ(out[j], 1.0);
}

TEST(ApplyUpdate, TwoCellLocality) {
  const DGBasis basis(4);
  const int n = basis.size();
  const int ncells = 9;
  std::mt19937_64 rng(21);
  const auto u = oracle::random_values(ncells * n, rng);
  const ShiftDecomposition s{2, 0.41};
  const auto pair = overlap_pair(basis, s.alpha);
  const auto full = apply_update(u, s, pair, BoundaryMode::periodic);
  for (int i = 0; i < ncells; ++i) {
    std::vector<double> sparse(u.size(), 0.0);
    for (const auto c : {wrap_index(i - 2, ncells), wrap_index(i - 3, ncells)})
      for (int j = 0; j < n; ++j) sparse[c * n + j] = u[c * n + j];
    const auto local = apply_update(sparse, s, pair, BoundaryMode::periodic);
    for (int j = 0; j < n; ++j) EXPECT_EQ(local[i * n + j], full[i * n + j]);
  }
}

TEST(ProjectionOracle, AgreesWithApplyUpdate) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> shift_dist(-4.0, 4.0);
  std::uniform_int_distribution<int> degree(1, 5);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const DGBasis basis(degree(rng));
    const double h = 0.75;
    const auto u = oracle::random_values(6 * basis.size(), rng);
    const double d = shift_dist(rng);
    const auto s = decompose_cells(d / h);
    const auto fast = apply_update(u, s, overlap_pair(basis, s.alpha), BoundaryMode::periodic);
    const auto ref = oracle::projection_oracle(u, d, h, basis);
    worst = std::max(worst, oracle::max_abs_diff(fast, ref));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(ProjectionOracle, IdentityAndMass) {
  const DGBasis basis(3);
  std::mt19937_64 rng(77);
  const auto u = oracle::random_values(5 * 4, rng, 0.0, 2.0);
  EXPECT_LE(oracle::max_abs_diff(oracle::projection_oracle(u, 0.0, 1.0, basis), u), 1e-13);
  const auto moved = oracle::projection_oracle(u, 0.613, 1.0, basis);
  EXPECT_NEAR(pencil_mass(moved, basis, 1.0), pencil_mass(u, basis, 1.0), 1e-13 * pencil_mass(u, basis, 1.0));
}
