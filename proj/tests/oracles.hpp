#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls the overlap-matrix or sweep code it is meant to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sldg/basis.hpp"

namespace sldg::oracle {

struct Rule {
  std::vector<double> x, w;
};

/// Gauss-Legendre by Golub-Welsch (Jacobi matrix eigenproblem).
inline Rule golub_welsch(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Rule r;
  for (int i = 0; i < n; ++i) {
    r.x.push_back(es.eigenvalues()(i));
    const double v = es.eigenvectors()(0, i);
    r.w.push_back(2.0 * v * v);
  }
  return r;
}

inline const Rule& fine_rule() {
  static const Rule r = golub_welsch(50);
  return r;
}

/// integral of f over [a,b] with the 50-point rule.
inline double integrate(double a, double b, const std::function<double(double)>& f) {
  const Rule& r = fine_rule();
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t q = 0; q < r.x.size(); ++q) s += r.w[q] * f(mid + half * r.x[q]);
  return half * s;
}

/// Lagrange polynomial through the given nodes, product form.
inline double lagrange(const std::vector<double>& nodes, int j, double x) {
  double v = 1.0;
  for (std::size_t m = 0; m < nodes.size(); ++m)
    if (static_cast<int>(m) != j) v *= (x - nodes[m]) / (nodes[j] - nodes[m]);
  return v;
}

inline double eval_poly(const std::vector<double>& nodes, const double* coeffs, double xi) {
  double s = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) s += coeffs[j] * lagrange(nodes, static_cast<int>(j), xi);
  return s;
}

/**
 * L2 projection of a piecewise polynomial translated by `shift` on an arbitrary
 * gap-free pencil [x0, x0 + sum widths]. Overlaps are found by scanning every
 * source cell (and its periodic images) and integrated with 50 Gauss points.
 */
inline std::vector<double> translate_project(const std::vector<double>& lowers, const std::vector<double>& widths,
                                             const std::vector<double>& values, double shift,
                                             const std::vector<double>& nodes, bool periodic) {
  const int n = static_cast<int>(nodes.size());
  const std::size_t ncells = lowers.size();
  const double x0 = lowers.front();
  const double length = lowers.back() + widths.back() - x0;

  Eigen::MatrixXd mass(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      mass(i, j) = integrate(-1.0, 1.0, [&](double x) { return lagrange(nodes, i, x) * lagrange(nodes, j, x); });
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(mass);

  std::vector<double> out(values.size(), 0.0);
  for (std::size_t s = 0; s < ncells; ++s) {
    const double foot_lo = lowers[s] - shift;
    const double foot_hi = lowers[s] + widths[s] - shift;
    long m_lo = 0, m_hi = 0;
    if (periodic) {
      m_lo = static_cast<long>(std::floor((foot_lo - x0) / length)) - 1;
      m_hi = static_cast<long>(std::floor((foot_hi - x0) / length)) + 1;
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (long m = m_lo; m <= m_hi; ++m) {
      for (std::size_t c = 0; c < ncells; ++c) {
        const double clo = lowers[c] + m * length;
        const double chi = clo + widths[c];
        const double a = std::max(clo, foot_lo);
        const double b = std::min(chi, foot_hi);
        if (b <= a) continue;
        for (int i = 0; i < n; ++i) {
          rhs(i) += integrate(a, b, [&](double v) {
                      const double xd = 2.0 * (v + shift - lowers[s]) / widths[s] - 1.0;
                      const double xs = 2.0 * (v - clo) / widths[c] - 1.0;
                      return lagrange(nodes, i, xd) * eval_poly(nodes, values.data() + c * n, xs);
                    }) * 2.0 / widths[s];
        }
      }
    }
    const Eigen::VectorXd coef = lu.solve(rhs);
    for (int i = 0; i < n; ++i) out[s * n + i] = coef(i);
  }
  return out;
}

/// Uniform pencil of cells [i h, (i+1) h].
inline std::vector<double> projection_oracle(const std::vector<double>& values, double shift, double h,
                                             const DGBasis& basis, bool periodic = true) {
  const std::size_t ncells = values.size() / basis.size();
  std::vector<double> lowers(ncells), widths(ncells, h);
  for (std::size_t i = 0; i < ncells; ++i) lowers[i] = static_cast<double>(i) * h;
  const std::vector<double> nodes(basis.nodes().begin(), basis.nodes().end());
  return translate_project(lowers, widths, values, shift, nodes, periodic);
}

inline std::vector<double> random_values(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace sldg::oracle
