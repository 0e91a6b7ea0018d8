#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "vnet/errors.hpp"

namespace vnet {

using cdouble = std::complex<double>;

/// Gauss-Legendre nodes and weights on [-1, 1], ascending node order.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Returns the n-point rule (computed once per n, cached, thread-safe).
const GaussLegendre& gauss_legendre(int n);

/// Fixed-order Gauss-Legendre integral of f over [a, b].
template <class F>
auto gl_integrate(F&& f, double a, double b, int n) {
    const GaussLegendre& rule = gauss_legendre(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto acc = f(mid + half * rule.nodes[0]) * (half * rule.weights[0]);
    for (int i = 1; i < n; ++i) acc += f(mid + half * rule.nodes[i]) * (half * rule.weights[i]);
    return acc;
}

struct AdaptiveOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-13;
    int max_intervals = 4000;
};

namespace detail {

// Gauss-Kronrod 7-15 abscissae (non-negative half) and weights.
inline constexpr double gk_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class T>
struct GKResult {
    T value;
    double error;
};

template <class F>
auto gk15(F& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    using T = decltype(f(mid) + f(mid));
    T k_sum = f(mid) * gk_wk[7];
    T g_sum = f(mid) * gk_wg[3];
    for (int i = 0; i < 7; ++i) {
        const T lo = f(mid - half * gk_x[i]);
        const T hi = f(mid + half * gk_x[i]);
        k_sum += (lo + hi) * gk_wk[i];
        if (i % 2 == 1) g_sum += (lo + hi) * gk_wg[i / 2];
    }
    GKResult<T> r;
    r.value = k_sum * half;
    r.error = std::abs((k_sum - g_sum) * half);
    return r;
}

} // namespace detail

/// Adaptive Gauss-Kronrod 7-15 over [a, b]; works for real and complex
/// integrands. Splits the worst interval until the summed error estimate
/// meets max(abs_tol, rel_tol * |integral|); throws QuadratureError when the
/// interval budget runs out first.
template <class F>
auto adaptive_gk(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
    struct Seg {
        double a, b, error;
        decltype(detail::gk15(f, a, b).value) value;
    };
    auto first = detail::gk15(f, a, b);
    std::vector<Seg> segs{{a, b, first.error, first.value}};
    while (true) {
        double total_err = 0.0;
        auto total = segs[0].value;
        total_err = segs[0].error;
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i) {
            total += segs[i].value;
            total_err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        if (total_err <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) return total;
        if (static_cast<int>(segs.size()) >= opt.max_intervals)
            throw QuadratureError("adaptive_gk: interval budget exhausted (error " +
                                  std::to_string(total_err) + ")");
        const Seg s = segs[worst];
        const double m = 0.5 * (s.a + s.b);
        auto left = detail::gk15(f, s.a, m);
        auto right = detail::gk15(f, m, s.b);
        segs[worst] = {s.a, m, left.error, left.value};
        segs.push_back({m, s.b, right.error, right.value});
    }
}

/// Weights for integrating a piecewise-linear interpolant against an
/// oscillatory or sharply peaked kernel on one panel [w0, w0 + delta]:
///   integral ~= left * f(w0) + right * f(w0 + delta)
/// with the kernel handled in closed form, so the result stays accurate when
/// the kernel varies much faster than the panel spacing.
struct PanelWeights {
    cdouble left;
    cdouble right;
};

/// Kernel 1/(z + i*t), t in [0, delta], with z = m + i*w0 (Re z > 0).
PanelWeights rational1_weights(cdouble z, double delta);

/// Kernel 1/(z + i*t)^2, t in [0, delta], with z = m + i*w0 (Re z > 0).
PanelWeights rational2_weights(cdouble z, double delta);

/// Combined kernel sigma2/(z + i*t) + 1/(z + i*t)^2 on one panel: identical
/// to sigma2 * rational1_weights + rational2_weights, computed in one pass
/// (the two kernels always appear together in the rate integral).
PanelWeights rate_kernel_weights(cdouble z, double delta, double sigma2);

/// Kernel exp(-i*c*w), w in [w0, w0 + delta] (Filon-type phase kernel).
PanelWeights phase_weights(double c, double w0, double delta);

} // namespace vnet
