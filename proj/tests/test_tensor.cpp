#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "sldg/tensor.hpp"

using namespace sldg;

TEST(Permutation, LinearCornersBijective) {
  const DGBasis basis(1);
  const auto perm = build_permutation(basis, 3);
  EXPECT_EQ(perm.dofs(), 8u);
  std::set<std::array<int, 3>> seen;
  for (std::size_t b = 0; b < 8; ++b) {
    const auto ijk = perm.index(b);
    for (int v : ijk) EXPECT_TRUE(v == 0 || v == 1);
    seen.insert(ijk);
  }
  EXPECT_EQ(seen.size(), 8u);
}

TEST(Permutation, OneDimensionIsIdentity) {
  const DGBasis basis(4);
  const auto perm = build_permutation(basis, 1);
  ASSERT_EQ(perm.dofs(), 5u);
  const auto line = perm.line(0, 0, 0);
  for (int s = 0; s < 5; ++s) EXPECT_EQ(line[s], s);
}

TEST(Permutation, LinesPartitionDofs) {
  for (int p = 1; p <= 8; ++p) {
    const DGBasis basis(p);
    const auto perm = build_permutation(basis, 3);
    const int n = p + 1;
    for (int d = 0; d < 3; ++d) {
      std::vector<int> hits(perm.dofs(), 0);
      for (int t1 = 0; t1 < n; ++t1)
        for (int t2 = 0; t2 < n; ++t2) {
          const auto line = perm.line(d, t1, t2);
          ASSERT_EQ(line.size(), static_cast<std::size_t>(n));
          for (int s = 0; s < n; ++s) {
            ++hits[line[s]];
            EXPECT_EQ(perm.index(line[s])[d], s);
          }
        }
      for (int h : hits) EXPECT_EQ(h, 1);
    }
  }
}

TEST(Permutation, LabelledValuesShowSweepProgression) {
  const DGBasis basis(3);
  const auto perm = build_permutation(basis, 3);
  std::vector<double> cell(perm.dofs());
  for (std::size_t b = 0; b < cell.size(); ++b) {
    const auto ijk = perm.index(b);
    cell[b] = 100 * ijk[0] + 10 * ijk[1] + ijk[2];
  }
  std::vector<double> line(4);
  pack_line(cell, perm, 1, 2, 3, line);  // sweep j, transverse (i, k) = (2, 3)
  for (int s = 0; s < 4; ++s) EXPECT_EQ(line[s], 200 + 10 * s + 3);
  pack_line(cell, perm, 2, 1, 0, line);  // sweep k, transverse (i, j) = (1, 0)
  for (int s = 0; s < 4; ++s) EXPECT_EQ(line[s], 100 + s);
}

TEST(Permutation, PackScatterRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const DGBasis basis(4);
  const auto perm = build_permutation(basis, 3);
  std::vector<double> x(perm.dofs());
  for (auto& v : x) v = u(rng);
  for (int d = 0; d < 3; ++d)
    for (int t1 = 0; t1 < 5; ++t1)
      for (int t2 = 0; t2 < 5; ++t2) {
        std::vector<double> y(x.size(), 0.0), line(5);
        pack_line(x, perm, d, t1, t2, line);
        scatter_line(line, perm, d, t1, t2, y);
        for (int s : perm.line(d, t1, t2)) EXPECT_EQ(y[s], x[s]);
      }
}

TEST(Permutation, DiscoveryFindsExternalOrdering) {
  const DGBasis basis(2);
  const int n = 3;
  // reversed lexicographic order: b = k + n j + n^2 i
  auto phi = [&](std::size_t b, const std::array<double, 3>& xi) {
    const int k = static_cast<int>(b % n), j = static_cast<int>((b / n) % n), i = static_cast<int>(b / (n * n));
    return basis.eval(i, xi[0]) * basis.eval(j, xi[1]) * basis.eval(k, xi[2]);
  };
  const auto perm = discover_permutation(basis, 3, 27, phi);
  for (std::size_t b = 0; b < 27; ++b) {
    const auto ijk = perm.index(b);
    EXPECT_EQ(static_cast<std::size_t>(ijk[2] + n * ijk[1] + n * n * ijk[0]), b);
  }
}

TEST(Permutation, NonNodalBasisRejected) {
  const DGBasis basis(2);
  auto modal = [](std::size_t b, const std::array<double, 3>& xi) { return std::pow(xi[0], double(b % 3)); };
  EXPECT_THROW(discover_permutation(basis, 3, 27, modal), std::runtime_error);
}
