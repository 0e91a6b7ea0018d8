#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "vnet/quadrature.hpp"

using namespace vnet;

TEST_CASE("gauss-legendre rules are exact for polynomials") {
    for (int n = 1; n <= 8; ++n) {
        const auto& rule = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : rule.weights) wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        // Exact for monomials up to degree 2n-1 on [-1,1].
        for (int d = 0; d <= 2 * n - 1; ++d) {
            const double got = gl_integrate([d](double x) { return std::pow(x, d); }, -1.0, 1.0, n);
            const double want = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
            CHECK(got == doctest::Approx(want).epsilon(1e-13));
        }
        // Symmetric nodes, ascending.
        for (int i = 0; i + 1 < n; ++i) CHECK(rule.nodes[i] < rule.nodes[i + 1]);
        for (int i = 0; i < n; ++i)
            CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[n - 1 - i]).epsilon(1e-14));
    }
}

TEST_CASE("gauss-legendre handles smooth transcendental integrands") {
    const double got = gl_integrate([](double x) { return std::sin(x); }, 0.0, M_PI, 64);
    CHECK(got == doctest::Approx(2.0).epsilon(1e-14));
    const double e = gl_integrate([](double x) { return std::exp(x); }, -1.0, 2.0, 32);
    CHECK(e == doctest::Approx(std::exp(2.0) - std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("adaptive gauss-kronrod resolves peaks and oscillation") {
    AdaptiveOptions opt;
    opt.rel_tol = 1e-10;
    // Narrow Lorentzian peak.
    const double a = 0.01;
    const double peak = adaptive_gk(
        [a](double x) { return 1.0 / (x * x + a * a); }, -1.0, 1.0, opt);
    CHECK(peak == doctest::Approx(2.0 * std::atan(1.0 / a) / a).epsilon(1e-9));
    // Many oscillations cancelling to zero.
    const double osc = adaptive_gk([](double x) { return std::sin(x); }, 0.0, 20.0 * M_PI, opt);
    CHECK(std::abs(osc) < 1e-8);
    // Complex-valued integrand.
    const cdouble z = adaptive_gk(
        [](double x) { return std::exp(cdouble(0.0, x)); }, 0.0, 1.0, opt);
    CHECK(z.real() == doctest::Approx(std::sin(1.0)).epsilon(1e-12));
    CHECK(z.imag() == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-12));
}

TEST_CASE("adaptive gauss-kronrod reports budget exhaustion") {
    AdaptiveOptions opt;
    opt.rel_tol = 1e-14;
    opt.abs_tol = 1e-300;
    opt.max_intervals = 8;
    CHECK_THROWS_AS(adaptive_gk([](double x) { return 1.0 / std::sqrt(std::abs(x) + 1e-300); },
                                -1.0, 1.0, opt),
                    QuadratureError);
}

namespace {

// Oracle: integrate (f0 + slope*t) * kernel(w0 + t) over the panel-local
// variable t in [0, delta] by adaptive quadrature, and compare against the
// closed-form panel weights. Integrating in t rather than absolute frequency
// keeps the interpolant argument exact when delta << w0 (w - w0 at the
// quadrature nodes would lose ~w0*eps/delta relative accuracy).
void check_panel(const char* name, PanelWeights pw, cdouble f0, cdouble f1,
                 const std::function<cdouble(double)>& kernel_at_t, double w0, double delta) {
    AdaptiveOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-305;
    opt.max_intervals = 200000;
    const cdouble slope = (f1 - f0) / delta;
    const cdouble oracle =
        adaptive_gk([&](double t) { return (f0 + slope * t) * kernel_at_t(t); }, 0.0, delta, opt);
    const cdouble got = pw.left * f0 + pw.right * f1;
    const double scale = std::max({std::abs(oracle), std::abs(pw.left), std::abs(pw.right)});
    INFO(name << " w0=" << w0 << " delta=" << delta);
    CHECK(std::abs(got - oracle) <= 1e-9 * std::max(scale, 1e-280));
}

} // namespace

TEST_CASE("rational kernel panel weights match quadrature") {
    const cdouble f0{0.8, -0.35}, f1{0.15, 0.6};
    for (double m : {1e-8, 1e-3, 1.0, 50.0}) {
        for (double w0 : {0.0, 1e-4, 0.7, 250.0}) {
            for (double delta : {1e-9, 1e-3, 0.5, 40.0}) {
                const cdouble z{m, w0};
                check_panel(
                    "1/(m+iw)", rational1_weights(z, delta), f0, f1,
                    [z](double t) { return 1.0 / (z + cdouble(0.0, t)); }, w0, delta);
                check_panel(
                    "1/(m+iw)^2", rational2_weights(z, delta), f0, f1,
                    [z](double t) {
                        const cdouble d = z + cdouble(0.0, t);
                        return 1.0 / (d * d);
                    },
                    w0, delta);
            }
        }
    }
}

TEST_CASE("fused rate kernel equals the weighted kernel sum") {
    const double sigma2 = 7.962143411069944e-14;
    for (double m : {1e-10, 1e-4, 0.8, 2e3}) {
        for (double w0 : {0.0, 1e-6, 3.0, 5e4}) {
            for (double delta : {1e-7, 0.05 * (w0 + 1e-6), 2.0}) {
                if (!(delta > 0.0)) continue;
                const cdouble z{m, w0};
                const PanelWeights fused = rate_kernel_weights(z, delta, sigma2);
                const PanelWeights p1 = rational1_weights(z, delta);
                const PanelWeights p2 = rational2_weights(z, delta);
                const cdouble wl = sigma2 * p1.left + p2.left;
                const cdouble wr = sigma2 * p1.right + p2.right;
                const double scale = std::max({std::abs(wl), std::abs(wr), 1e-300});
                CHECK(std::abs(fused.left - wl) <= 1e-13 * scale);
                CHECK(std::abs(fused.right - wr) <= 1e-13 * scale);
            }
        }
    }
}

TEST_CASE("phase kernel panel weights match quadrature") {
    const cdouble f0{0.9, 0.2}, f1{-0.4, 0.55};
    for (double c : {0.0, 1e-12, 1e-3, 0.9, 30.0}) {
        for (double w0 : {0.0, 2.0, 77.0}) {
            for (double delta : {1e-6, 0.3, 2.5}) {
                if (std::abs(c) * delta > 300.0) continue; // oracle would need huge budgets
                check_panel(
                    "exp(-icw)", phase_weights(c, w0, delta), f0, f1,
                    [c, w0](double t) { return std::exp(cdouble(0.0, -c * (w0 + t))); }, w0,
                    delta);
            }
        }
    }
    // c = 0 degenerates to the trapezoid rule exactly.
    const auto pw = phase_weights(0.0, 5.0, 2.0);
    CHECK(pw.left.real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pw.right.real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(pw.left.imag()) < 1e-14);
}

TEST_CASE("panel weights integrate constants exactly") {
    // With f0 = f1 = 1 the weights must integrate the bare kernel: check the
    // 1/(m+iw) kernel against its antiderivative -i*log(m+iw).
    const double m = 0.37, w0 = 1.4, delta = 3.1;
    const auto pw = rational1_weights(cdouble{m, w0}, delta);
    const cdouble want =
        cdouble(0, -1) * (std::log(cdouble(m, w0 + delta)) - std::log(cdouble(m, w0)));
    const cdouble got = pw.left + pw.right;
    CHECK(std::abs(got - want) < 1e-14);
}
