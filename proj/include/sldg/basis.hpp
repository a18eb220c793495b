#pragma once

/**
 * @file basis.hpp
 * @brief Nodal DG reference element on [-1,1]: Gauss-Lobatto-Legendre nodes,
 * Gauss-Legendre rules, Lagrange basis evaluation and the element mass matrix.
 */

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace sldg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Nodes and weights of a quadrature rule on [-1,1], nodes ascending.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

namespace detail {

/// P_n(x) and P_n'(x) by the three-term recurrence. Valid for |x| < 1 (derivative).
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0;
  double p = x;
  for (int k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = p_next;
  }
  const double dp = n * (x * p - p_prev) / (x * x - 1.0);
  return {p, dp};
}

inline double legendre(int n, double x) {
  if (n == 0) return 1.0;
  double p_prev = 1.0;
  double p = x;
  for (int k = 2; k <= n; ++k) {
    const double p_next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * p_prev) / k;
    p_prev = p;
    p = p_next;
  }
  return p;
}

// Mirror the lower half onto the upper half so rules are exactly symmetric.
inline void symmetrize(QuadratureRule& rule) {
  const std::size_t n = rule.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
}

}  // namespace detail

inline constexpr int kMaxDegree = 8;
inline constexpr int kMaxGaussPoints = 20;

/**
 * Gauss-Lobatto-Legendre rule with p+1 points: the endpoints and the roots of
 * P_p'. Interior roots come from Newton iteration on P_p' started at the
 * Chebyshev-Gauss-Lobatto points. Exact for polynomials of degree <= 2p-1.
 */
inline QuadratureRule gll_rule(int p) {
  if (p < 1 || p > kMaxDegree) {
    throw std::invalid_argument("gll_rule: degree must lie in [1, " + std::to_string(kMaxDegree) +
                                "], got " + std::to_string(p));
  }
  QuadratureRule rule;
  rule.nodes.resize(p + 1);
  rule.weights.resize(p + 1);
  rule.nodes.front() = -1.0;
  rule.nodes.back() = 1.0;
  const double pp1 = p * (p + 1.0);
  for (int i = 1; i < p; ++i) {
    double x = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < 100; ++it) {
      const auto [pn, dpn] = detail::legendre_with_derivative(p, x);
      // (1-x^2) P'' = 2x P' - p(p+1) P
      const double d2pn = (2.0 * x * dpn - pp1 * pn) / (1.0 - x * x);
      const double dx = dpn / d2pn;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
  }
  for (int i = 0; i <= p; ++i) {
    const double pn = detail::legendre(p, rule.nodes[i]);
    rule.weights[i] = 2.0 / (pp1 * pn * pn);
  }
  detail::symmetrize(rule);
  return rule;
}

/// n-point Gauss-Legendre rule, exact for polynomials of degree <= 2n-1.
inline QuadratureRule gauss_rule(int n) {
  if (n < 1 || n > kMaxGaussPoints) {
    throw std::invalid_argument("gauss_rule: point count must lie in [1, " +
                                std::to_string(kMaxGaussPoints) + "], got " + std::to_string(n));
  }
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dpn = 1.0;
    for (int it = 0; it < 100; ++it) {
      const auto [pn, d] = detail::legendre_with_derivative(n, x);
      const double dx = pn / d;
      x -= dx;
      dpn = d;
      if (std::abs(dx) < 1e-16) break;
    }
    dpn = detail::legendre_with_derivative(n, x).second;
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dpn * dpn);
  }
  detail::symmetrize(rule);
  return rule;
}

/**
 * Nodal Lagrange basis of degree p at the GLL nodes, with its exact mass
 * matrix. Immutable once built.
 */
class DGBasis {
 public:
  explicit DGBasis(int p) : degree_(p), gll_(gll_rule(p)), gauss_(gauss_rule(2 * p + 2)) {
    const int n = p + 1;
    denominators_.resize(n);
    for (int j = 0; j < n; ++j) {
      double d = 1.0;
      for (int m = 0; m < n; ++m)
        if (m != j) d *= gll_.nodes[j] - gll_.nodes[m];
      denominators_[j] = 1.0 / d;
    }

    mass_ = Matrix::Zero(n, n);
    std::vector<double> phi(n);
    for (std::size_t q = 0; q < gauss_.size(); ++q) {
      eval_all(gauss_.nodes[q], phi);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) mass_(i, j) += gauss_.weights[q] * phi[i] * phi[j];
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j) mass_(i, j) = mass_(j, i);
    Eigen::LLT<Matrix> llt(mass_);
    if (llt.info() != Eigen::Success) throw std::runtime_error("DGBasis: mass matrix is not SPD");
    mass_inv_ = llt.solve(Matrix::Identity(n, n));
  }

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }

  std::span<const double> nodes() const { return gll_.nodes; }
  std::span<const double> weights() const { return gll_.weights; }
  const QuadratureRule& gll() const { return gll_; }
  /// The 2p+2 point Gauss rule used for all overlap integrals.
  const QuadratureRule& gauss() const { return gauss_; }

  const Matrix& mass() const { return mass_; }
  const Matrix& mass_inv() const { return mass_inv_; }

  /// l_j(xi). Defined for any real xi, including points outside [-1,1].
  double eval(int j, double xi) const {
    double v = denominators_[j];
    for (int m = 0; m <= degree_; ++m)
      if (m != j) v *= xi - gll_.nodes[m];
    return v;
  }

  void eval_all(double xi, std::span<double> out) const {
    for (int j = 0; j <= degree_; ++j) out[j] = eval(j, xi);
  }

  /// l_j'(xi).
  double derivative(int j, double xi) const {
    double sum = 0.0;
    for (int k = 0; k <= degree_; ++k) {
      if (k == j) continue;
      double prod = 1.0;
      for (int m = 0; m <= degree_; ++m)
        if (m != j && m != k) prod *= xi - gll_.nodes[m];
      sum += prod;
    }
    return sum * denominators_[j];
  }

 private:
  int degree_;
  QuadratureRule gll_;
  QuadratureRule gauss_;
  std::vector<double> denominators_;
  Matrix mass_;
  Matrix mass_inv_;
};

inline double lagrange_eval(const DGBasis& basis, int j, double xi) { return basis.eval(j, xi); }

}  // namespace sldg
