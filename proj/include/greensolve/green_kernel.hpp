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
#include <numbers>
#include <stdexcept>

#include "greensolve/gauss.hpp"
#include "greensolve/quad_grid.hpp"

namespace greensolve {

enum class KernelVariant { Classical, Rfl };

namespace detail {

/// Chebyshev interpolant on [a, b], evaluated by Clenshaw recurrence.
struct Chebyshev {
    double a = 0, b = 1;
    std::vector<double> coef;

    template <class F>
    static Chebyshev fit(F&& f, double a, double b, int n) {
        Chebyshev ch;
        ch.a = a;
        ch.b = b;
        std::vector<double> fx(n);
        for (int j = 0; j < n; ++j) {
            const double theta = std::numbers::pi * (j + 0.5) / n;
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta);
            fx[j] = f(x);
        }
        ch.coef.resize(n);
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                acc += fx[j] * std::cos(std::numbers::pi * k * (j + 0.5) / n);
            ch.coef[k] = 2.0 * acc / n;
        }
        ch.coef[0] *= 0.5;
        return ch;
    }

    double operator()(double x) const {
        const double t = (2.0 * x - a - b) / (b - a);
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t k = coef.size(); k-- > 1;) {
            const double tmp = 2.0 * t * b1 - b2 + coef[k];
            b2 = b1;
            b1 = tmp;
        }
        return t * b1 - b2 + coef[0];
    }
};

}  // namespace detail

/// Explicit Green kernel of the unit ball.
///
/// Classical (s = 1, gamma = 1): Kelvin-image form
///   G(x,y) = (1/4pi) (1/|x-y| - 1/(|x| |y - x*|)),  x* = x/|x|^2.
/// Restricted fractional Laplacian (0 < s < 1, gamma = s):
///   G(x,y) = kappa |x-y|^(2s-n) int_0^r t^(s-1) (1+t)^(-n/2) dt,
///   r = (1-|x|^2)(1-|y|^2)/|x-y|^2,
///   kappa = Gamma(n/2) / (4^s pi^(n/2) Gamma(s)^2).
///
/// Both are evaluated through the boundary-stable factorization
///   G(x,y) = (delta(x) delta(y))^gamma * strength(x,y),
/// where strength stays bounded as either argument approaches the
/// boundary. Immutable value type; evaluation is pure.
class GreenKernel {
  public:
    static GreenKernel classical(int dim = 3) {
        return GreenKernel(KernelVariant::Classical, dim, 1.0);
    }

    static GreenKernel rfl(double s, int dim = 3) {
        return GreenKernel(KernelVariant::Rfl, dim, s);
    }

    KernelVariant variant() const { return variant_; }
    int dim() const { return dim_; }
    double order_s() const { return s_; }
    double boundary_gamma() const { return gamma_; }
    double normalization() const { return kappa_; }

    /// Free-space Riesz constant C(n,s) = Gamma(n/2-s)/(4^s pi^(n/2) Gamma(s)):
    /// the coefficient of |x-y|^(2s-n) in the near-diagonal limit.
    double free_space_constant() const { return riesz_const_; }

    /// Complete value B(s, n/2-s) of the incomplete-beta factor.
    double beta_complete() const { return beta_complete_; }

    /// int_0^r t^(s-1) (1+t)^(-n/2) dt, monotone in r, bounded by
    /// beta_complete().
    double incomplete_beta_factor(double r) const {
        if (r < 0.0)
            throw std::invalid_argument("incomplete_beta_factor: r must be >= 0");
        if (r == 0.0) return 0.0;
        return phi(r) * std::pow(r, s_);
    }

    /// G(x,y) / (delta(x) delta(y))^gamma; finite up to the boundary,
    /// singular only at x = y.
    double strength(const Vec3& x, const Vec3& y) const {
        const double nx = x.norm();
        const double ny = y.norm();
        check_domain(nx, ny);
        const double d2 = (x - y).squaredNorm();
        if (d2 == 0.0)
            throw std::domain_error("kernel evaluated on the diagonal x = y");
        if (variant_ == KernelVariant::Classical) {
            // d_img^2 - d^2 = (1-|x|^2)(1-|y|^2); see Kelvin-image identity.
            const double d = std::sqrt(d2);
            const double dimg2 = d2 + (1.0 - nx * nx) * (1.0 - ny * ny);
            const double dimg = std::sqrt(dimg2);
            return (1.0 + nx) * (1.0 + ny) /
                   (4.0 * std::numbers::pi * d * dimg * (d + dimg));
        }
        const double r = (1.0 - nx * nx) * (1.0 - ny * ny) / d2;
        const double dn = dim_ == 3 ? 1.0 / (d2 * std::sqrt(d2))
                                    : std::pow(d2, -0.5 * dim_);
        return kappa_ * phi(r) * dn * std::pow((1.0 + nx) * (1.0 + ny), s_);
    }

    /// Kernel value G(x,y).
    double eval(const Vec3& x, const Vec3& y) const {
        const double dx = 1.0 - x.norm();
        const double dy = 1.0 - y.norm();
        return std::pow(dx * dy, gamma_) * strength(x, y);
    }

    /// G(x,y) divided by the two-sided bound
    /// |x-y|^(2s-n) (delta(x) delta(y)/|x-y|^2 ^ 1)^gamma.
    double estimate_ratio(const Vec3& x, const Vec3& y) const {
        const double d2 = (x - y).squaredNorm();
        const double dx = 1.0 - x.norm();
        const double dy = 1.0 - y.norm();
        const double factor =
            std::pow(std::min(dx * dy / d2, 1.0), gamma_) *
            std::pow(d2, 0.5 * (2.0 * s_ - dim_));
        return eval(x, y) / factor;
    }

  private:
    GreenKernel(KernelVariant variant, int dim, double s)
        : variant_(variant), dim_(dim), s_(s) {
        if (dim < 3) throw std::invalid_argument("GreenKernel: dim must be >= 3");
        if (variant == KernelVariant::Classical) {
            if (s != 1.0)
                throw std::invalid_argument("classical kernel requires s = 1");
            gamma_ = 1.0;
        } else {
            if (!(s > 0.0 && s < 1.0))
                throw std::invalid_argument("RFL kernel requires 0 < s < 1");
            gamma_ = s;
        }
        if (dim - 2.0 * s <= 0.0)
            throw std::invalid_argument("GreenKernel: requires n - 2s > 0");
        const double n2 = 0.5 * dim;
        kappa_ = std::exp(std::lgamma(n2) - s * std::log(4.0) -
                          n2 * std::log(std::numbers::pi) -
                          2.0 * std::lgamma(s));
        riesz_const_ = std::exp(std::lgamma(n2 - s) - s * std::log(4.0) -
                                n2 * std::log(std::numbers::pi) -
                                std::lgamma(s));
        beta_complete_ = std::exp(std::lgamma(s) + std::lgamma(n2 - s) -
                                  std::lgamma(n2));
        rule_s_ = gauss_power_weight(64, s_);
        rule_c_ = gauss_power_weight(64, n2 - s_);
        if (variant == KernelVariant::Rfl) {
            // phi(r) is analytic on [0,1]; the tail factor g(x) with
            // x = 1/(1+r) is analytic on [0,1/2]. Both fit in a few
            // dozen Chebyshev coefficients to machine precision.
            cheb_lo_ = detail::Chebyshev::fit(
                [this](double r) { return phi_direct_small(r); }, 0.0, 1.0, 40);
            cheb_hi_ = detail::Chebyshev::fit(
                [this](double x) { return tail_integrand_direct(x); }, 0.0, 0.5,
                40);
        }
    }

    void check_domain(double nx, double ny) const {
        if (nx >= 1.0 || ny >= 1.0)
            throw std::domain_error("kernel arguments must lie inside the unit ball");
    }

    /// int_0^1 u^(s-1) (1 + r u)^(-n/2) du  (= phi(r)), valid for r <= 1.
    double phi_direct_small(double r) const {
        const double n2 = 0.5 * dim_;
        double acc = 0.0;
        for (std::size_t i = 0; i < rule_s_.nodes.size(); ++i)
            acc += rule_s_.weights[i] * std::pow(1.0 + r * rule_s_.nodes[i], -n2);
        return acc;
    }

    /// g(x) = int_0^1 u^(c-1) (1 - x u)^(s-1) du with c = n/2 - s;
    /// the tail of F is x^c g(x) with x = 1/(1+r).
    double tail_integrand_direct(double x) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule_c_.nodes.size(); ++i)
            acc += rule_c_.weights[i] *
                   std::pow(1.0 - x * rule_c_.nodes[i], s_ - 1.0);
        return acc;
    }

    /// phi(r) = r^(-s) int_0^r t^(s-1) (1+t)^(-n/2) dt, stable for all r > 0.
    double phi(double r) const {
        if (r <= 1.0) {
            return cheb_lo_.coef.empty() ? phi_direct_small(r) : cheb_lo_(r);
        }
        const double x = 1.0 / (1.0 + r);
        const double c = 0.5 * dim_ - s_;
        const double g = cheb_hi_.coef.empty() ? tail_integrand_direct(x)
                                               : cheb_hi_(x);
        const double tail = std::pow(x, c) * g;
        return (beta_complete_ - tail) * std::pow(r, -s_);
    }

    KernelVariant variant_;
    int dim_;
    double s_;
    double gamma_ = 1.0;
    double kappa_ = 0.0;
    double riesz_const_ = 0.0;
    double beta_complete_ = 0.0;
    QuadratureRule rule_s_;
    QuadratureRule rule_c_;
    detail::Chebyshev cheb_lo_;
    detail::Chebyshev cheb_hi_;
};

}  // namespace greensolve
