#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <vector>

#include "vnet/coverage.hpp"
#include "vnet/errors.hpp"
#include "vnet/quadrature.hpp"
#include "vnet/rng.hpp"

using namespace vnet;

namespace {

Scenario one_bs_scenario() {
    Scenario sc;
    sc.region = {2.0, 2.0};
    sc.base_stations = {{1, 1, {1.0, 1.0}, 23.0, dbm_to_watts(23.0), 20e6, 1.1, 100.0}};
    sc.demands = {{1, 8e8, 0.5, 0.01, 1}};
    return sc;
}

Scenario three_bs_scenario() {
    Scenario sc;
    sc.region = {2.0, 2.0};
    sc.base_stations = {
        {1, 1, {0.5, 0.5}, 30.0, dbm_to_watts(30.0), 20e6, 0.65, 100.0},
        {2, 1, {1.5, 0.6}, 30.0, dbm_to_watts(30.0), 20e6, 0.65, 100.0},
        {3, 2, {1.0, 1.5}, 30.0, dbm_to_watts(30.0), 20e6, 0.65, 100.0},
    };
    sc.demands = {{1, 3e5, 0.5, 3.0, 1}, {2, 1.2e5, 0.35, 2.0, 2}};
    return sc;
}

Scenario four_bs_scenario() {
    Scenario sc;
    sc.region = {3.0, 2.0};
    sc.base_stations = {
        {1, 1, {0.6, 0.5}, 30.0, dbm_to_watts(30.0), 20e6, 0.55, 100.0},
        {2, 1, {2.2, 0.6}, 33.0, dbm_to_watts(33.0), 20e6, 0.70, 150.0},
        {3, 2, {1.4, 1.4}, 27.0, dbm_to_watts(27.0), 20e6, 0.45, 80.0},
        {4, 2, {0.7, 1.6}, 30.0, dbm_to_watts(30.0), 20e6, 0.60, 120.0},
    };
    sc.demands = {{1, 2e6, 0.4, 5.0, 1}, {2, 8e5, 0.3, 3.0, 2}};
    return sc;
}

// Draws one interference sample for the uniform-angle circular model.
double draw_interference(Substream& rng, const Scenario& sc, int serving, double u,
                         ActiveSet active) {
    const auto& B = sc.base_stations;
    const double alpha = sc.propagation.pathloss_exponent;
    double total = 0.0;
    for (std::size_t j = 0; j < B.size(); ++j) {
        if (static_cast<int>(j) == serving || !(active & (1u << j))) continue;
        const double d = distance(B[serving].position, B[j].position);
        const double th = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        const double r2 = u * u + d * d - 2.0 * u * d * std::cos(th);
        const double g = rng.exponential(B[j].tx_power_w);
        total += g * std::pow(r2, -0.5 * alpha);
    }
    return total;
}

} // namespace

TEST_CASE("interferer characteristic function: invariants and MC oracle") {
    const Scenario sc = three_bs_scenario();
    const CoverageEngine eng(sc);

    // Exactly 1 at omega = 0, modulus bounded by 1 everywhere.
    const cdouble at0 = eng.interferer_cf(1, 0, 0.3, 0.0);
    CHECK(at0.real() == 1.0);
    CHECK(at0.imag() == 0.0);
    for (double om : {1e-6, 1e-2, 0.4, 3.0, 55.0, 1e4, 1e7}) {
        CHECK(std::abs(eng.interferer_cf(1, 0, 0.3, om)) <= 1.0 + 1e-12);
        // Conjugate symmetry in the sign of omega.
        const cdouble p = eng.interferer_cf(2, 0, 0.5, om);
        const cdouble n = eng.interferer_cf(2, 0, 0.5, -om);
        CHECK(std::abs(p - std::conj(n)) < 1e-12);
    }

    // Monte Carlo oracle: average exp(i*omega*I_j) over fresh draws of the
    // interferer angle and fading; the analytic value must sit within the
    // 5-sigma band of the empirical mean (component standard error <= 1/sqrt(N)).
    const int n_draws = 400000;
    const double band = 5.0 / std::sqrt(static_cast<double>(n_draws));
    for (double om : {0.8, 6.0, 40.0}) {
        Substream rng(99, static_cast<std::uint64_t>(om * 16));
        cdouble mc(0.0, 0.0);
        for (int t = 0; t < n_draws; ++t) {
            const double i1 = draw_interference(rng, sc, 0, 0.3, 0b010);
            mc += std::exp(cdouble(0.0, om * i1));
        }
        mc /= static_cast<double>(n_draws);
        const cdouble an = eng.interferer_cf(1, 0, 0.3, om);
        CHECK(std::abs(an.real() - mc.real()) < band);
        CHECK(std::abs(an.imag() - mc.imag()) < band);
    }

    CHECK_THROWS_AS(eng.interferer_cf(0, 0, 0.3, 1.0), ValidationError);
    CHECK_THROWS_AS(eng.interferer_cf(5, 0, 0.3, 1.0), ValidationError);
    CHECK_THROWS_AS(eng.interferer_cf(1, 0, -0.1, 1.0), ValidationError);
}

TEST_CASE("interference pdf: degenerate flag, normalization, MC histogram") {
    const Scenario sc = three_bs_scenario();
    const CoverageEngine eng(sc);
    const double u = 0.3;

    const Density empty = eng.interference_pdf(1e-9, u, 0, 0);
    CHECK(empty.degenerate);
    CHECK(empty.value == 0.0);
    CHECK_FALSE(eng.interference_pdf(1e-9, u, 0, 0b110).degenerate);

    // Total mass via a log substitution spanning far into both tails.
    const double mass = adaptive_gk(
        [&](double lc) {
            const double cv = std::exp(lc);
            return eng.interference_pdf(cv, u, 0, 0b110).value * cv;
        },
        std::log(1e-12), std::log(1e3), {1e-8, 1e-12, 4000});
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));

    // Histogram oracle: empirical bin masses from direct simulation against
    // the integrated analytic density.
    const int n_draws = 300000;
    Substream rng(1234, 7);
    std::vector<double> edges;
    for (double e = 1e-4; e < 30.0; e *= 10.0) {
        edges.push_back(e);
        edges.push_back(3.0 * e);
    }
    std::vector<int> counts(edges.size() + 1, 0);
    for (int t = 0; t < n_draws; ++t) {
        const double c = draw_interference(rng, sc, 0, u, 0b110);
        const std::size_t bin =
            std::upper_bound(edges.begin(), edges.end(), c) - edges.begin();
        counts[bin]++;
    }
    for (std::size_t bin = 0; bin + 1 < counts.size(); ++bin) {
        const double lo = bin == 0 ? 0.0 : edges[bin - 1];
        const double hi = edges[bin];
        const double want = adaptive_gk(
            [&](double c) { return eng.interference_pdf(c, u, 0, 0b110).value; }, lo, hi,
            {1e-9, 1e-14, 4000});
        const double got = static_cast<double>(counts[bin]) / n_draws;
        const double sigma = std::sqrt(std::max(want * (1.0 - want), 1e-9) / n_draws);
        CHECK(std::abs(got - want) < 5.0 * sigma + 2e-4);
    }
}

TEST_CASE("sinr distribution: closed form, derivative consistency, MC KS") {
    const Scenario sc = three_bs_scenario();
    const CoverageEngine eng(sc);
    const auto& b0 = sc.base_stations[0];
    const double q = b0.coverage_radius_km, mu = 1.0 / b0.tx_power_w;
    const double s2 = sc.noise_power_w(0);

    // Without interference the SINR density marginalizes the exponential
    // fading over the disc: f(t) = int (2u/q^2) mu u^a s2 e^{-mu t s2 u^a} du.
    for (double t : {1e3, 1e5, 3e6}) {
        const double oracle = adaptive_gk(
            [&](double u) {
                const double upa = u * u * u * u;
                return 2.0 * u / (q * q) * mu * upa * s2 * std::exp(-mu * t * s2 * upa);
            },
            0.0, q, {1e-12, 1e-300, 4000});
        CHECK(eng.sinr_pdf(t, 0, 0) == doctest::Approx(oracle).epsilon(1e-9));
    }
    CHECK(eng.sinr_pdf(0.0, 0, 0b110) == 0.0);
    CHECK(eng.sinr_pdf(-1.0, 0, 0b110) == 0.0);
    CHECK(eng.sinr_ccdf(0.0, 0, 0b110) == 1.0);

    // pdf is the negative derivative of the ccdf.
    for (double t : {0.03, 0.4, 2.0, 15.0}) {
        const double h = 1e-4 * t;
        const double fd = (eng.sinr_ccdf(t - h, 0, 0b110) - eng.sinr_ccdf(t + h, 0, 0b110)) /
                          (2.0 * h);
        CHECK(eng.sinr_pdf(t, 0, 0b110) == doctest::Approx(fd).epsilon(1e-5));
    }

    // Kolmogorov-Smirnov distance between the analytic CDF and the empirical
    // CDF of simulated SINR draws.
    const int n_draws = 200000;
    Substream rng(777, 3);
    std::vector<double> samples(n_draws);
    for (int t = 0; t < n_draws; ++t) {
        const double u = q * std::sqrt(rng.uniform());
        const double h = rng.exponential(b0.tx_power_w);
        const double upa = u * u * u * u;
        const double inter = draw_interference(rng, sc, 0, u, 0b110);
        samples[t] = h / upa / (s2 + inter);
    }
    std::sort(samples.begin(), samples.end());
    double ks = 0.0;
    for (int g = 0; g <= 40; ++g) {
        const double t = 1e-3 * std::pow(10.0, 6.0 * g / 40.0);
        const double an = 1.0 - eng.sinr_ccdf(t, 0, 0b110);
        const double emp =
            static_cast<double>(std::upper_bound(samples.begin(), samples.end(), t) -
                                samples.begin()) /
            n_draws;
        ks = std::max(ks, std::abs(an - emp));
    }
    CHECK(ks < 0.006); // 5-sigma KS band at 2e5 draws is ~0.0044
}

TEST_CASE("per-BS rate coverage: limits, monotonicity, load clamp, MC oracle") {
    const Scenario sc = three_bs_scenario();
    const CoverageEngine eng(sc);
    const ServiceDemand base = sc.demands[0];

    ServiceDemand d = base;
    d.min_rate_bps = 1e-6;
    CHECK(eng.per_bs_coverage(0, d, 0b110) == doctest::Approx(1.0).epsilon(1e-9));
    d.min_rate_bps = 1e13;
    CHECK(eng.per_bs_coverage(0, d, 0b110) < 1e-6);

    double prev = 1.0;
    for (double k = 1e5; k < 3e8; k *= 1.9) {
        d.min_rate_bps = k;
        const double c = eng.per_bs_coverage(0, d, 0b110);
        CHECK(c <= prev + 1e-9);
        CHECK(c >= -1e-9);
        CHECK(c <= 1.0 + 1e-9);
        prev = c;
    }

    // More interferers can only reduce coverage.
    d = base;
    const double c_none = eng.per_bs_coverage(0, d, 0);
    const double c_one = eng.per_bs_coverage(0, d, 0b010);
    const double c_two = eng.per_bs_coverage(0, d, 0b110);
    CHECK(c_one <= c_none + 1e-9);
    CHECK(c_two <= c_one + 1e-9);

    // The serving BS inside the active set is ignored.
    CHECK(eng.per_bs_coverage(0, d, 0b111) == c_two);

    // Mean load clamps at one UE: any intensity below the clamp point gives
    // the same answer.
    const double q = sc.base_stations[0].coverage_radius_km;
    ServiceDemand lo = base, hi = base;
    lo.ue_intensity_per_km2 = 0.1 / (3.14159265358979323846 * q * q);
    hi.ue_intensity_per_km2 = 1.0 / (3.14159265358979323846 * q * q);
    CHECK(eng.per_bs_coverage(0, lo, 0b110) ==
          doctest::Approx(eng.per_bs_coverage(0, hi, 0b110)).epsilon(1e-12));

    // Monte Carlo oracle for the full pipeline: mean-load time sharing over
    // the disc with both interferers active.
    const auto& b0 = sc.base_stations[0];
    const double s2 = sc.noise_power_w(0);
    const double nbar = std::max(1.0, CoverageEngine::mean_load(base.ue_intensity_per_km2, q));
    const int n_draws = 200000;
    Substream rng(4242, 0);
    int hits = 0;
    for (int t = 0; t < n_draws; ++t) {
        const double u = q * std::sqrt(rng.uniform());
        const double h = rng.exponential(b0.tx_power_w);
        const double upa = u * u * u * u;
        const double inter = draw_interference(rng, sc, 0, u, 0b110);
        const double sinr = h / upa / (s2 + inter);
        const double rate = b0.bandwidth_hz / nbar * std::log2(1.0 + sinr);
        if (rate > base.min_rate_bps) hits++;
    }
    const double mc = static_cast<double>(hits) / n_draws;
    const double sigma = std::sqrt(mc * (1.0 - mc) / n_draws);
    CHECK(std::abs(eng.per_bs_coverage(0, base, 0b110) - mc) < 5.0 * sigma + 1e-4);
}

TEST_CASE("mean load values") {
    CHECK(CoverageEngine::mean_load(10.0, 0.3) == doctest::Approx(2.8274333882).epsilon(1e-10));
    CHECK(CoverageEngine::mean_load(100.0, 0.5) == doctest::Approx(78.5398163397).epsilon(1e-10));
    CHECK(CoverageEngine::mean_load(0.0, 1.0) == 0.0);
}

TEST_CASE("network coverage: zero allocation, linearity, determinism") {
    const Scenario sc = three_bs_scenario();
    const CoverageEngine eng(sc);

    Allocation none;
    none.leased.assign(3, 0);
    none.delta.assign(3, std::vector<double>(2, 0.0));
    CHECK(eng.network_coverage(none, 0) == 0.0);
    CHECK(eng.network_coverage(none, 1) == 0.0);

    // One leased BS with a single slice reduces to the per-BS formula.
    Allocation single = none;
    single.leased[1] = 1;
    single.delta[1][0] = 0.6;
    const double area_w = 3.14159265358979323846 * 0.65 * 0.65 / 4.0;
    const double want = 0.6 * area_w * eng.per_bs_coverage(1, sc.demands[0], 0b010);
    CHECK(eng.network_coverage(single, 0) == doctest::Approx(want).epsilon(1e-12));

    // Linearity in delta for a fixed lease set.
    Allocation all = Allocation::equal_split_all(sc);
    Allocation half = all;
    for (auto& row : half.delta) {
        row[0] *= 0.5;
        row[1] *= 1.5;
    }
    CHECK(eng.network_coverage(half, 0) ==
          doctest::Approx(0.5 * eng.network_coverage(all, 0)).epsilon(1e-12));
    CHECK(eng.network_coverage(half, 1) ==
          doctest::Approx(1.5 * eng.network_coverage(all, 1)).epsilon(1e-12));

    // A fresh engine reproduces the values bit for bit (fixed grids and
    // summation order).
    const CoverageEngine eng2(sc);
    CHECK(eng2.network_coverage(all, 0) == eng.network_coverage(all, 0));
    CHECK(eng2.per_bs_coverage(2, sc.demands[1], 0b011) ==
          eng.per_bs_coverage(2, sc.demands[1], 0b011));
}

TEST_CASE("coefficient expansion: completeness identity and evaluation") {
    const Scenario sc = four_bs_scenario();
    const CoverageEngine eng(sc);
    const CoverageCoefficients cc = eng.precompute_coefficients();

    CHECK(cc.bs_count == 4);
    CHECK(cc.sp_count == 2);
    for (int b = 0; b < 4; ++b) {
        CHECK(cc.others[b].size() == 3);
        CHECK(cc.bit_of(b, b) == -1);
        for (int k = 0; k < 3; ++k) CHECK(cc.others[b][cc.bit_of(b, cc.others[b][k])] ==
                                          cc.others[b][k]);
    }

    // For every active subset: the sum of coefficients over contained
    // subsets equals area_weight * per-BS coverage against that active set.
    for (int b = 0; b < 4; ++b) {
        for (int sp = 0; sp < 2; ++sp) {
            for (std::uint32_t act = 0; act < 16; ++act) {
                const ActiveSet active = act & ~(1u << b);
                const std::uint32_t m = cc.compress(b, active);
                double sum = cc.coeff[b][sp][0];
                for (std::uint32_t sub = m; sub; sub = (sub - 1) & m)
                    sum += cc.coeff[b][sp][sub];
                const double want =
                    cc.area_weight[b] * eng.per_bs_coverage(b, sc.demands[sp], active);
                CHECK(sum == doctest::Approx(want).epsilon(1e-9));
            }
        }
    }

    // evaluate() agrees with network_coverage on several allocations.
    Allocation a = Allocation::equal_split_all(sc);
    CHECK(cc.evaluate(a, 0) == doctest::Approx(eng.network_coverage(a, 0)).epsilon(1e-9));
    CHECK(cc.evaluate(a, 1) == doctest::Approx(eng.network_coverage(a, 1)).epsilon(1e-9));
    Allocation partial = a;
    partial.leased[2] = 0;
    partial.delta[2] = {0.0, 0.0};
    partial.delta[0] = {0.9, 0.1};
    CHECK(cc.evaluate(partial, 0) ==
          doctest::Approx(eng.network_coverage(partial, 0)).epsilon(1e-9));

    // Expansion size guard.
    QuadratureConfig tight;
    tight.max_expansion_size = 2;
    const CoverageEngine small(sc, tight);
    CHECK_THROWS_AS(small.precompute_coefficients(), ValidationError);
}

TEST_CASE("voronoi rate coverage: single-BS closed form and validations") {
    const Scenario sc = one_bs_scenario();
    const CoverageEngine eng(sc);
    const auto cells = voronoi_tessellation({sc.base_stations[0].position}, sc.region);
    REQUIRE(cells.size() == 1);

    Allocation a;
    a.leased = {1};
    a.delta = {{1.0}};

    const double got = eng.voronoi_rate_coverage(a, 0, cells);

    // Oracle: noise-only coverage mixed over the truncated Poisson cell
    // load, integrated against the exact cell distance density.
    const auto& b0 = sc.base_stations[0];
    const double mu = 1.0 / b0.tx_power_w, s2 = sc.noise_power_w(0);
    const double nu = sc.demands[0].ue_intensity_per_km2 * cells[0].area;
    double oracle = 0.0, cum = 0.0;
    for (int r = 0; r < 200; ++r) {
        const double p = std::exp(r * std::log(nu) - nu - std::lgamma(r + 1.0));
        const double before = cum;
        cum += p;
        if (cum < 0.5e-6 || before > 1.0 - 0.5e-6) continue;
        const double T = std::exp2((1.0 + r) * sc.demands[0].min_rate_bps / b0.bandwidth_hz) - 1.0;
        oracle += p * adaptive_gk(
                          [&](double u) {
                              const double upa = u * u * u * u;
                              return cell_distance_pdf(cells[0], u) *
                                     std::exp(-mu * T * s2 * upa);
                          },
                          0.0, cells[0].circumradius, {1e-10, 1e-14, 4000});
    }
    CHECK(got == doctest::Approx(oracle).epsilon(2e-5));

    // Validations: every BS must be leased, cells must match the scenario.
    const Scenario sc3 = three_bs_scenario();
    const CoverageEngine eng3(sc3);
    const auto cells3 = voronoi_tessellation(
        {sc3.base_stations[0].position, sc3.base_stations[1].position,
         sc3.base_stations[2].position},
        sc3.region);
    Allocation partial;
    partial.leased = {1, 0, 1};
    partial.delta = {{0.5, 0.2}, {0.0, 0.0}, {0.3, 0.4}};
    CHECK_THROWS_AS(eng3.voronoi_rate_coverage(partial, 0, cells3), ValidationError);
    Allocation full3 = Allocation::equal_split_all(sc3);
    CHECK_THROWS_AS(eng3.voronoi_rate_coverage(full3, 0, {cells3[0]}), ValidationError);
    auto shuffled = cells3;
    std::swap(shuffled[0], shuffled[1]);
    CHECK_THROWS_AS(eng3.voronoi_rate_coverage(full3, 0, shuffled), ValidationError);

    // Zero slices for an SP give zero coverage for it.
    Allocation skew = full3;
    for (int b = 0; b < 3; ++b) skew.delta[b] = {1.0, 0.0};
    CHECK(eng3.voronoi_rate_coverage(skew, 1, cells3) == 0.0);
}

TEST_CASE("voronoi rate coverage tracks direct simulation") {
    const Scenario sc = three_bs_scenario();
    const CoverageEngine eng(sc);
    const auto cells = voronoi_tessellation(
        {sc.base_stations[0].position, sc.base_stations[1].position,
         sc.base_stations[2].position},
        sc.region);
    const Allocation a = Allocation::equal_split_all(sc);
    const int sp = 0;
    const double analytic = eng.voronoi_rate_coverage(a, sp, cells);

    // Independent simulation of the underlying network model: UE uniform on
    // the region, nearest-BS association, interferers at their true
    // positions, Poisson cell load. The analytic path approximates the
    // interferer geometry by a uniform angle, so agreement is approximate.
    const ServiceDemand& dem = sc.demands[sp];
    const double alpha = sc.propagation.pathloss_exponent;
    const int n_draws = 150000;
    Substream rng(2026, 11);
    double acc = 0.0;
    for (int t = 0; t < n_draws; ++t) {
        const Vec2 ue{rng.uniform(0.0, sc.region.width), rng.uniform(0.0, sc.region.height)};
        int serving = 0;
        double best = 1e300;
        for (int b = 0; b < 3; ++b) {
            const double d = distance(ue, sc.base_stations[b].position);
            if (d < best) {
                best = d;
                serving = b;
            }
        }
        const auto& bs = sc.base_stations[serving];
        const double h = rng.exponential(bs.tx_power_w);
        double inter = 0.0;
        for (int j = 0; j < 3; ++j) {
            if (j == serving) continue;
            const double rj = distance(ue, sc.base_stations[j].position);
            inter += rng.exponential(sc.base_stations[j].tx_power_w) * std::pow(rj, -alpha);
        }
        const double sinr = h * std::pow(best, -alpha) / (sc.noise_power_w(serving) + inter);
        const int load = 1 + rng.poisson(dem.ue_intensity_per_km2 * cells[serving].area);
        const double rate = bs.bandwidth_hz / load * std::log2(1.0 + sinr);
        if (rate > dem.min_rate_bps) acc += a.delta[serving][sp];
    }
    const double mc = acc / n_draws;
    CHECK(std::abs(analytic - mc) < 0.03);
}

TEST_CASE("coefficient sidecar cache round trip") {
    const Scenario sc = three_bs_scenario();
    const CoverageEngine eng(sc);
    const CoverageCoefficients cc = eng.precompute_coefficients();
    const std::string path = "/tmp/vnet_coeff_cache_test.json";

    eng.save_coefficients(path, cc);
    CoverageCoefficients back;
    REQUIRE(eng.load_coefficients(path, back));
    CHECK(back.bs_count == cc.bs_count);
    CHECK(back.sp_count == cc.sp_count);
    CHECK(back.others == cc.others);
    CHECK(back.area_weight == cc.area_weight); // exact: JSON round-trips doubles
    CHECK(back.coeff == cc.coeff);

    // A missing file is a miss, not an error.
    CHECK_FALSE(eng.load_coefficients("/tmp/vnet_no_such_cache.json", back));

    // A different config is a miss.
    QuadratureConfig other;
    other.rate_grid_points = 128;
    const CoverageEngine eng_other(sc, other);
    CHECK_FALSE(eng_other.load_coefficients(path, back));

    // A different scenario is a miss.
    const Scenario sc4 = four_bs_scenario();
    const CoverageEngine eng4(sc4);
    CHECK_FALSE(eng4.load_coefficients(path, back));

    // Malformed JSON is an error.
    {
        std::ofstream f(path);
        f << "{ not json";
    }
    CHECK_THROWS_AS(eng.load_coefficients(path, back), ParseError);
}

TEST_CASE("quadrature config validation") {
    QuadratureConfig c;
    CHECK_NOTHROW(c.validate());
    c.omega_max = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.rel_tol = 2.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.poisson_tail_eps = 0.7;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.rate_grid_points = 2;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = {};
    c.max_expansion_size = 25;
    CHECK_THROWS_AS(c.validate(), ValidationError);

    // Engine constructor validates both scenario and config.
    Scenario sc = three_bs_scenario();
    QuadratureConfig bad;
    bad.abs_tol = -1.0;
    CHECK_THROWS_AS(CoverageEngine(sc, bad), ValidationError);
}
