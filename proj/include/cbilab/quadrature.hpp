#pragma once

#include <type_traits>
#include <vector>

namespace cbilab {

/// One Gauss-Legendre rule: nodes and weights on a reference interval.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n points on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// The same rule mapped to [a, b].
QuadratureRule gauss_legendre_on(int n, double a, double b);

/// Integrate a scalar/vector/matrix-valued integrand over [a, b] with an
/// n-point Gauss-Legendre rule. Result type follows the integrand.
template <typename F>
auto integrate_gl(F&& f, double a, double b, int n) {
    const QuadratureRule rule = gauss_legendre_on(n, a, b);
    using Result = std::decay_t<decltype(f(a))>;
    Result acc = rule.weights[0] * f(rule.nodes[0]);
    for (int i = 1; i < n; ++i) acc += rule.weights[i] * f(rule.nodes[i]);
    return acc;
}

/// Composite Simpson with an even number of panels; used where the contract
/// pins Simpson rather than Gauss-Legendre.
template <typename F>
auto integrate_simpson(F&& f, double a, double b, int panels) {
    if (panels % 2 != 0) ++panels;
    const double h = (b - a) / panels;
    using Result = std::decay_t<decltype(f(a))>;
    Result acc = f(a) + f(b);
    for (int i = 1; i < panels; ++i) {
        acc += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    }
    return Result((h / 3.0) * acc);
}

}  // namespace cbilab
