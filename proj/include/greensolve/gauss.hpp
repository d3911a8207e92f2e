// Copyright 2026 the greensolve authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace greensolve {

/// One-dimensional quadrature rule: nodes and weights on some interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

/// Golub-Welsch: nodes/weights from the symmetric Jacobi matrix of a
/// three-term recurrence. `alpha` are the diagonal recurrence
/// coefficients, `beta` the off-diagonal squares (beta[0] is the zeroth
/// moment of the weight).
inline QuadratureRule golub_welsch(const std::vector<double>& alpha,
                                   const std::vector<double>& beta) {
    const int n = static_cast<int>(alpha.size());
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        jac(i, i) = alpha[i];
        if (i + 1 < n) {
            const double b = std::sqrt(beta[i + 1]);
            jac(i, i + 1) = b;
            jac(i + 1, i) = b;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = beta[0] * v0 * v0;
    }
    return rule;
}

}  // namespace detail

/// Gauss-Jacobi rule for weight (1-x)^a (1+x)^b on (-1, 1).
inline QuadratureRule gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_jacobi: n must be >= 1");
    if (a <= -1.0 || b <= -1.0)
        throw std::invalid_argument("gauss_jacobi: exponents must be > -1");
    std::vector<double> alpha(n), beta(n);
    const double apb = a + b;
    // zeroth moment: 2^(a+b+1) B(a+1, b+1)
    beta[0] = std::exp((apb + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                       std::lgamma(b + 1.0) - std::lgamma(apb + 2.0));
    alpha[0] = (b - a) / (apb + 2.0);
    for (int k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double den = (2.0 * kk + apb) * (2.0 * kk + apb + 2.0);
        alpha[k] = (b * b - a * a) / den;
        const double num = 4.0 * kk * (kk + a) * (kk + b) * (kk + apb);
        const double d2 = (2.0 * kk + apb) * (2.0 * kk + apb) *
                          (2.0 * kk + apb + 1.0) * (2.0 * kk + apb - 1.0);
        beta[k] = num / d2;
    }
    return detail::golub_welsch(alpha, beta);
}

/// Gauss-Legendre rule on (-1, 1).
inline QuadratureRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

/// Gauss-Legendre rule mapped to (lo, hi).
inline QuadratureRule gauss_legendre(int n, double lo, double hi) {
    QuadratureRule rule = gauss_legendre(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

/// Gauss rule on (0,1) for the weight u^(b-1); used for the kernel's
/// incomplete-beta factor.
inline QuadratureRule gauss_power_weight(int n, double b) {
    QuadratureRule rule = gauss_jacobi(n, 0.0, b - 1.0);
    // map (-1,1), weight (1+x)^(b-1) -> (0,1), weight u^(b-1):
    // u = (1+x)/2, du = dx/2, (1+x)^(b-1) = (2u)^(b-1)
    const double scale = std::pow(2.0, -b);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = 0.5 * (1.0 + rule.nodes[i]);
        rule.weights[i] *= scale;
    }
    return rule;
}

}  // namespace greensolve
