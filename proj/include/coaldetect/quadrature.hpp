#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace coaldetect {

/// N-point Gauss-Legendre rule on [-1, 1]. Nodes come from the Golub-Welsch
/// eigenproblem and are then polished by Newton steps on P_N.
template <typename Scalar, int N>
struct GaussLegendre {
  std::array<Scalar, N> nodes{};
  std::array<Scalar, N> weights{};

  static const GaussLegendre& rule() {
    static const GaussLegendre instance = build();
    return instance;
  }

 private:
  static GaussLegendre build() {
    using Matrix = Eigen::Matrix<Scalar, N, N>;
    Matrix jacobi = Matrix::Zero();
    for (int i = 1; i < N; ++i) {
      const Scalar beta = Scalar(i) / std::sqrt(Scalar(4 * i * i - 1));
      jacobi(i, i - 1) = beta;
      jacobi(i - 1, i) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi, Eigen::EigenvaluesOnly);
    GaussLegendre out;
    for (int i = 0; i < N; ++i) {
      Scalar x = solver.eigenvalues()(i);
      Scalar derivative = 1;
      for (int iter = 0; iter < 4; ++iter) {
        // Three-term recurrence for P_N(x) and P_N'(x).
        Scalar p0 = 1;
        Scalar p1 = x;
        for (int n = 2; n <= N; ++n) {
          const Scalar p2 = (Scalar(2 * n - 1) * x * p1 - Scalar(n - 1) * p0) / Scalar(n);
          p0 = p1;
          p1 = p2;
        }
        derivative = Scalar(N) * (x * p1 - p0) / (x * x - 1);
        x -= p1 / derivative;
      }
      out.nodes[static_cast<std::size_t>(i)] = x;
      out.weights[static_cast<std::size_t>(i)] = Scalar(2) / ((1 - x * x) * derivative * derivative);
    }
    return out;
  }
};

template <typename Scalar, int N, typename F>
Scalar gauss_legendre(const F& f, Scalar a, Scalar b) {
  const auto& rule = GaussLegendre<Scalar, N>::rule();
  const Scalar half = (b - a) / 2;
  const Scalar mid = (a + b) / 2;
  Scalar sum = 0;
  for (int i = 0; i < N; ++i) {
    sum += rule.weights[static_cast<std::size_t>(i)] * f(mid + half * rule.nodes[static_cast<std::size_t>(i)]);
  }
  return sum * half;
}

/// Adaptive Gauss-Legendre: each panel is bisected until the whole-panel
/// estimate and the sum of its halves agree to `panel_tol` (absolute).
/// Integrates over consecutive `breakpoints`, which must be sorted.
template <typename Scalar, int N = 20, typename F>
Scalar integrate_adaptive(const F& f, const std::vector<Scalar>& breakpoints, Scalar panel_tol, int max_depth = 40) {
  struct Panel {
    Scalar a, b, whole;
    int depth;
  };
  Scalar total = 0;
  std::vector<Panel> stack;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const Scalar a = breakpoints[i];
    const Scalar b = breakpoints[i + 1];
    if (!(b > a)) continue;
    stack.push_back({a, b, gauss_legendre<Scalar, N>(f, a, b), 0});
    while (!stack.empty()) {
      const Panel panel = stack.back();
      stack.pop_back();
      const Scalar mid = (panel.a + panel.b) / 2;
      const Scalar left = gauss_legendre<Scalar, N>(f, panel.a, mid);
      const Scalar right = gauss_legendre<Scalar, N>(f, mid, panel.b);
      if (std::abs(left + right - panel.whole) < panel_tol || panel.depth >= max_depth) {
        total += left + right;
      } else {
        stack.push_back({mid, panel.b, right, panel.depth + 1});
        stack.push_back({panel.a, mid, left, panel.depth + 1});
      }
    }
  }
  return total;
}

}  // namespace coaldetect
