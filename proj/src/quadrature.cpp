#include "vnet/quadrature.hpp"

#include <map>
#include <mutex>

namespace vnet {

namespace {

GaussLegendre compute_gauss_legendre(int n) {
    if (n < 1) throw ValidationError("gauss_legendre: order must be >= 1");
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < (n + 1) / 2; ++k) {
        // Chebyshev-based initial guess for the k-th root of P_n, then Newton.
        double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[k] = -x; // roots found in descending order; store ascending
        rule.nodes[n - 1 - k] = x;
        rule.weights[k] = w;
        rule.weights[n - 1 - k] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

} // namespace

const GaussLegendre& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, GaussLegendre> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

namespace {

constexpr double kSeriesCut = 0.5; // switch to power series below this argument size

// sum_{k>=1} (-1)^{k+1} w^k / (k + shift); shift=0 gives log(1+w).
cdouble alternating_series(cdouble w, int shift) {
    cdouble sum = 0.0, term = 1.0;
    for (int k = 1; k <= 80; ++k) {
        term *= -w;
        const cdouble add = -term / static_cast<double>(k + shift);
        sum += add;
        if (std::abs(add) < 1e-18 * std::max(1e-300, std::abs(sum))) break;
    }
    return sum;
}

} // namespace

PanelWeights rational1_weights(cdouble z, double delta) {
    // m0 = integral of 1/(z+it), m1 = integral of t/(z+it), t in [0, delta].
    const cdouble w = cdouble(0.0, delta) / z;
    cdouble m0, m1;
    if (std::abs(w) <= kSeriesCut) {
        m0 = cdouble(0.0, -1.0) * alternating_series(w, 0);
        m1 = cdouble(0.0, -delta) * alternating_series(w, 1);
    } else {
        m0 = cdouble(0.0, -1.0) * std::log(1.0 + w);
        m1 = cdouble(0.0, -1.0) * (delta - z * m0);
    }
    return {m0 - m1 / delta, m1 / delta};
}

PanelWeights rational2_weights(cdouble z, double delta) {
    // n0 = integral of 1/(z+it)^2  (cancellation-free closed form),
    // n1 = integral of t/(z+it)^2, t in [0, delta].
    const cdouble w = cdouble(0.0, delta) / z;
    const cdouble n0 = delta / (z * (z + cdouble(0.0, delta)));
    cdouble n1;
    if (std::abs(w) <= kSeriesCut) {
        // -(log(1+w) - w/(1+w)) expanded to avoid the small-w cancellation
        cdouble sum = 0.0, term = w;
        for (int k = 2; k <= 80; ++k) {
            term *= -w;
            const cdouble add = -term * (static_cast<double>(k - 1) / k);
            sum += add;
            if (std::abs(add) < 1e-18 * std::max(1e-300, std::abs(sum))) break;
        }
        n1 = -sum;
    } else {
        const cdouble m0 = cdouble(0.0, -1.0) * std::log(1.0 + w);
        n1 = cdouble(0.0, -1.0) * (m0 - z * n0);
    }
    return {n0 - n1 / delta, n1 / delta};
}

PanelWeights rate_kernel_weights(cdouble z, double delta, double sigma2) {
    const cdouble w = cdouble(0.0, delta) / z;
    const cdouble n0 = delta / (z * (z + cdouble(0.0, delta)));
    cdouble m0, m1, n1;
    if (std::abs(w) <= kSeriesCut) {
        // One pass over the shared powers of w for all three series.
        cdouble s0 = 0.0, s1 = 0.0, s2 = 0.0, term = 1.0;
        for (int k = 1; k <= 80; ++k) {
            term *= -w;
            const cdouble a0 = -term / static_cast<double>(k);
            s0 += a0;
            s1 += -term / static_cast<double>(k + 1);
            if (k >= 2) s2 += -term * (static_cast<double>(k - 1) / k);
            if (std::abs(a0) * k < 1e-18 * std::max(1e-300, std::abs(s0))) break;
        }
        m0 = cdouble(0.0, -1.0) * s0;
        m1 = cdouble(0.0, -delta) * s1;
        n1 = s2;
    } else {
        m0 = cdouble(0.0, -1.0) * std::log(1.0 + w);
        m1 = cdouble(0.0, -1.0) * (delta - z * m0);
        n1 = cdouble(0.0, -1.0) * (m0 - z * n0);
    }
    return {sigma2 * (m0 - m1 / delta) + (n0 - n1 / delta),
            sigma2 * (m1 / delta) + n1 / delta};
}

PanelWeights phase_weights(double c, double w0, double delta) {
    // e0 = integral of e^{-i s theta}, g = integral of s e^{-i s theta}, s in [0,1]
    const double theta = c * delta;
    cdouble e0, g;
    if (std::abs(theta) <= kSeriesCut) {
        e0 = 0.0;
        g = 0.0;
        cdouble term = 1.0;
        for (int k = 0; k <= 40; ++k) {
            e0 += term / static_cast<double>(k + 1);
            g += term / static_cast<double>(k + 2);
            term *= cdouble(0.0, -theta) / static_cast<double>(k + 1);
            if (std::abs(term) < 1e-18) break;
        }
    } else {
        const cdouble ph = std::exp(cdouble(0.0, -theta));
        e0 = (1.0 - ph) / cdouble(0.0, theta);
        g = (cdouble(0.0, theta) * ph + ph - 1.0) / (theta * theta);
    }
    const cdouble front = std::exp(cdouble(0.0, -c * w0)) * delta;
    return {front * (e0 - g), front * g};
}

} // namespace vnet
