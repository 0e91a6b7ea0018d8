#include "vnet/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>

#include <json.hpp>

#include "vnet/errors.hpp"
#include "vnet/parallel.hpp"

namespace vnet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.6931471805599453;
constexpr double kOmegaRatio = 1.05; // geometric growth of the frequency grid
constexpr int kUPanelPoints = 12;    // GL points per serving-distance panel
constexpr int kThetaStart = 32;      // initial angle-average resolution
constexpr int kThetaMax = 4096;
constexpr int kRatePanels = 8;       // panels of the rate integral (one leading
                                     // + geometric decades up to the endpoint)

double pow_from_r2(double r2, double alpha) {
    return alpha == 4.0 ? r2 * r2 : std::pow(r2, 0.5 * alpha);
}

double pow_u(double u, double alpha) {
    if (alpha == 4.0) {
        const double u2 = u * u;
        return u2 * u2;
    }
    return std::pow(u, alpha);
}

std::uint64_t dbits(double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, sizeof u);
    return u;
}

std::uint64_t fnv_bytes(const void* p, std::size_t n, std::uint64_t h) {
    const unsigned char* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= c[i];
        h *= 1099511628211ull;
    }
    return h;
}

// Average of z / (z - i*omega) over the uniform interferer angle, z = mu_j *
// r(theta)^alpha, for every omega at once. Midpoint rule with doubled node
// counts until the sup-norm change drops below tol; for this smooth periodic
// integrand the midpoint rule converges spectrally, and it preserves the
// exact invariants phi(0) = 1 and |phi| <= 1 at any resolution. Worst cases
// (u close to the interferer ring) may stop at the node cap; the residual is
// confined to a few serving-distance nodes of small weight.
void angle_averaged_cf(double mu_j, double alpha, double d, double u,
                       const std::vector<double>& omega, double tol, cdouble* out) {
    const std::size_t K = omega.size();
    std::vector<double> re(K), im(K);
    const auto eval = [&](int L, cdouble* dst) {
        std::fill(re.begin(), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
        for (int l = 0; l < L; ++l) {
            const double th = kPi * (l + 0.5) / L;
            const double r2 = u * u + d * d - 2.0 * u * d * std::cos(th);
            const double z = mu_j * pow_from_r2(r2, alpha);
            const double z2 = z * z;
            for (std::size_t k = 0; k < K; ++k) {
                const double w = omega[k];
                const double inv = 1.0 / (z2 + w * w);
                re[k] += z2 * inv;
                im[k] += z * w * inv;
            }
        }
        const double s = 1.0 / L;
        for (std::size_t k = 0; k < K; ++k) dst[k] = cdouble(re[k] * s, im[k] * s);
    };
    std::vector<cdouble> prev(K);
    int L = kThetaStart;
    eval(L, prev.data());
    while (L < kThetaMax) {
        L *= 2;
        eval(L, out);
        double diff = 0.0;
        for (std::size_t k = 0; k < K; ++k) diff = std::max(diff, std::abs(out[k] - prev[k]));
        if (diff <= tol) return;
        std::copy(out, out + K, prev.begin());
    }
}

// Gauss-Legendre nodes over [bounds_0, bounds_last] with panel breaks at every
// interior bound, each panel subdivided so no piece exceeds max_width.
void panel_nodes(std::vector<double> bounds, double max_width, int pts,
                 std::vector<double>& nodes, std::vector<double>& weights) {
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end(),
                             [](double a, double b) { return b - a < 1e-12; }),
                 bounds.end());
    const GaussLegendre& rule = gauss_legendre(pts);
    nodes.clear();
    weights.clear();
    for (std::size_t p = 0; p + 1 < bounds.size(); ++p) {
        const double a = bounds[p], b = bounds[p + 1];
        const int parts = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
        for (int s = 0; s < parts; ++s) {
            const double pa = a + (b - a) * s / parts;
            const double pb = a + (b - a) * (s + 1) / parts;
            const double mid = 0.5 * (pa + pb), half = 0.5 * (pb - pa);
            for (int n = 0; n < pts; ++n) {
                nodes.push_back(mid + half * rule.nodes[n]);
                weights.push_back(half * rule.weights[n]);
            }
        }
    }
}

// Geometric frequency grid shared by every inversion at serving BS b. Starts
// at omega = 0 (the characteristic function is exactly 1 there), then grows
// by kOmegaRatio from well below the smallest interference scale to well
// above the largest one; the panel kernels are exact, so the fine low end
// costs accuracy nothing and the truncation error is ~ sum_j E[I_j] / end.
std::vector<double> make_omega_grid(const Scenario& sc, int b, double u_max,
                                    const QuadratureConfig& cfg) {
    const auto& B = sc.base_stations;
    const double alpha = sc.propagation.pathloss_exponent;
    double s_lo = std::numeric_limits<double>::infinity(), s_hi = 0.0;
    for (std::size_t j = 0; j < B.size(); ++j) {
        if (static_cast<int>(j) == b) continue;
        const double muj = 1.0 / B[j].tx_power_w;
        const double d = distance(B[b].position, B[j].position);
        const double r_lo = std::max(d - u_max, 0.05 * d);
        const double r_hi = d + u_max;
        s_lo = std::min(s_lo, muj * pow_u(r_lo, alpha));
        s_hi = std::max(s_hi, muj * pow_u(r_hi, alpha));
    }
    std::vector<double> grid{0.0};
    if (s_hi == 0.0) return grid; // no interferers: the grid is never used
    const double end = std::min(cfg.omega_max, 1e6 * s_hi);
    double w = std::min(1e-4 * s_lo, 0.5 * end);
    while (w < end) {
        grid.push_back(w);
        if (grid.size() > 50000)
            throw QuadratureError("frequency grid too large; raise tolerances or lower omega_max");
        w *= kOmegaRatio;
    }
    grid.push_back(end);
    return grid;
}

// Probabilities of the cell load N = 1 + R, R ~ Poisson(nu), truncated to the
// window [quantile(eps/2), quantile(1 - eps/2)] without renormalization.
std::vector<std::pair<int, double>> truncated_load_pmf(double nu, double eps) {
    std::vector<std::pair<int, double>> out;
    if (!(nu > 0.0)) {
        out.emplace_back(1, 1.0);
        return out;
    }
    const double lo = 0.5 * eps, hi = 1.0 - 0.5 * eps;
    const double lognu = std::log(nu);
    double cum_before = 0.0;
    for (int r = 0;; ++r) {
        const double p = std::exp(r * lognu - nu - std::lgamma(r + 1.0));
        const double cum_after = cum_before + p;
        if (cum_after >= lo && cum_before <= hi) out.emplace_back(1 + r, p);
        cum_before = cum_after;
        if (cum_before >= hi && r + 1 > nu) break;
        if (r > 20000000) throw NumericalError("cell load pmf window did not close");
    }
    return out;
}

std::uint64_t cell_key(int b, const Cell& cell) {
    std::uint64_t h = 1469598103934665603ull;
    h = fnv_bytes(&b, sizeof b, h);
    h = fnv_bytes(&cell.site_index, sizeof cell.site_index, h);
    const auto add = [&](double v) { h = fnv_bytes(&v, sizeof v, h); };
    add(cell.site.x);
    add(cell.site.y);
    for (const Vec2& v : cell.boundary) {
        add(v.x);
        add(v.y);
    }
    return h;
}

} // namespace

void QuadratureConfig::validate() const {
    if (!(omega_max > 0.0) || !std::isfinite(omega_max))
        throw ValidationError("omega_max must be positive and finite");
    if (!(rel_tol > 0.0) || !(rel_tol < 1.0))
        throw ValidationError("rel_tol must lie in (0, 1)");
    if (!(abs_tol >= 0.0) || !std::isfinite(abs_tol))
        throw ValidationError("abs_tol must be nonnegative and finite");
    if (!(poisson_tail_eps > 0.0) || !(poisson_tail_eps < 0.5))
        throw ValidationError("poisson_tail_eps must lie in (0, 0.5)");
    if (rate_grid_points < kRatePanels || rate_grid_points > 4096)
        throw ValidationError("rate_grid_points must lie in [8, 4096]");
    if (max_expansion_size < 0 || max_expansion_size > 20)
        throw ValidationError("max_expansion_size must lie in [0, 20]");
}

int CoverageCoefficients::bit_of(int b, int j) const {
    const auto& o = others[b];
    const auto it = std::lower_bound(o.begin(), o.end(), j);
    if (it == o.end() || *it != j) return -1;
    return static_cast<int>(it - o.begin());
}

std::uint32_t CoverageCoefficients::compress(int b, ActiveSet active) const {
    std::uint32_t s = 0;
    const auto& o = others[b];
    for (std::size_t k = 0; k < o.size(); ++k)
        if (active & (1u << o[k])) s |= (1u << k);
    return s;
}

double CoverageCoefficients::evaluate(const Allocation& alloc, int sp) const {
    if (alloc.leased.size() != bs_count || alloc.delta.size() != bs_count)
        throw ValidationError("allocation shape does not match the coefficients");
    if (sp < 0 || static_cast<std::size_t>(sp) >= sp_count)
        throw ValidationError("service provider index out of range");
    ActiveSet leased_mask = 0;
    for (std::size_t b = 0; b < bs_count; ++b)
        if (alloc.leased[b]) leased_mask |= 1u << b;
    double total = 0.0;
    for (std::size_t b = 0; b < bs_count; ++b) {
        if (!alloc.leased[b]) continue;
        const double d = alloc.delta[b][sp];
        if (d == 0.0) continue;
        const std::uint32_t m = compress(static_cast<int>(b), leased_mask);
        double s = coeff[b][sp][0];
        for (std::uint32_t sub = m; sub; sub = (sub - 1) & m) s += coeff[b][sp][sub];
        total += d * s;
    }
    return total;
}

double CoverageEngine::mean_load(double lambda_per_km2, double q_km) {
    return lambda_per_km2 * kPi * q_km * q_km;
}

// ---------------------------------------------------------------------------
// Internal state

// Per serving BS: the interferer list, the serving-distance quadrature over
// its coverage disc (panels split at every interferer ring it contains), the
// shared frequency grid, and the tabulated per-interferer characteristic
// functions phi[j][i * K + k] at (u_i, omega_k).
struct CoverageEngine::BsCtx {
    std::vector<int> others;
    std::vector<double> dist; // to each entry of others
    std::vector<double> u_nodes;
    std::vector<double> u_weights;
    std::vector<double> omega;
    std::vector<std::vector<cdouble>> phi;
    double q = 0.0, mu = 0.0, sigma2 = 0.0, bandwidth = 0.0, alpha = 4.0;
    double area_weight = 0.0;
};

// Rate-outage table for one (serving BS, demand): F(interferer set) =
// f_empty when the set is empty, else Re sum_{i,k} g[i*K+k] * Phi_set[i*K+k]
// with Phi_set the elementwise product of the set's phi tables. The rate and
// serving-distance integrals plus the inversion kernels are folded into g.
struct CoverageEngine::GTable {
    std::vector<cdouble> g;
    double f_empty = 0.0;
};

// Per (BS, Voronoi cell): quadrature over the cell's serving distance with
// the exact cell distance density, the frequency grid, and the product CF of
// every other BS (Voronoi evaluation always uses the full interference set).
struct CoverageEngine::VoronoiCtx {
    std::vector<double> u_nodes;
    std::vector<double> u_weights;
    std::vector<double> fcell;
    std::vector<double> omega;
    std::vector<cdouble> phi_all; // empty when there are no other BSs
    double area = 0.0;
};

struct CoverageEngine::State {
    std::recursive_mutex mu;
    std::map<int, BsCtx> bs;
    // (b, bits(min_rate), bits(intensity)) -> rate-outage table
    std::map<std::tuple<int, std::uint64_t, std::uint64_t>, GTable> g;
    // (b, bits(min_rate), bits(intensity), subset) -> F value
    std::map<std::tuple<int, std::uint64_t, std::uint64_t, std::uint32_t>, double> fmask;
    // (b, subset) -> CF product table; small capped cache for the pdf paths
    std::map<std::pair<int, std::uint32_t>, std::vector<cdouble>> prod;
    // (b, slot, bits(u)) -> CF row at an off-grid serving distance
    std::map<std::tuple<int, int, std::uint64_t>, std::vector<cdouble>> row;
    std::map<std::uint64_t, VoronoiCtx> vor;
    // (cell key, bits(min_rate), bits(intensity)) -> cell coverage bracket
    std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>, double> vor_cov;
};

CoverageEngine::CoverageEngine(const Scenario& scenario, QuadratureConfig cfg)
    : scenario_(scenario), cfg_(cfg), state_(new State) {
    validate_scenario(scenario_);
    cfg_.validate();
    if (scenario_.base_stations.size() > 31)
        throw ValidationError("coverage engine supports at most 31 base stations");
}

CoverageEngine::~CoverageEngine() = default;

const CoverageEngine::BsCtx& CoverageEngine::bs_ctx(int b) const {
    auto it = state_->bs.find(b);
    if (it != state_->bs.end()) return it->second;

    const auto& B = scenario_.base_stations;
    BsCtx c;
    c.q = B[b].coverage_radius_km;
    c.mu = 1.0 / B[b].tx_power_w;
    c.sigma2 = scenario_.noise_power_w(b);
    c.bandwidth = B[b].bandwidth_hz;
    c.alpha = scenario_.propagation.pathloss_exponent;
    c.area_weight = kPi * c.q * c.q / scenario_.region.area();
    std::vector<double> bounds{0.0, c.q};
    for (std::size_t j = 0; j < B.size(); ++j) {
        if (static_cast<int>(j) == b) continue;
        c.others.push_back(static_cast<int>(j));
        const double d = distance(B[b].position, B[j].position);
        c.dist.push_back(d);
        if (d > 1e-12 && d < c.q - 1e-12) bounds.push_back(d);
    }
    panel_nodes(std::move(bounds), c.q / 6.0, kUPanelPoints, c.u_nodes, c.u_weights);
    c.omega = make_omega_grid(scenario_, b, c.q, cfg_);

    const std::size_t n_u = c.u_nodes.size(), K = c.omega.size();
    const double tol = std::clamp(cfg_.rel_tol, 1e-12, 1e-6);
    c.phi.assign(c.others.size(), std::vector<cdouble>(n_u * K));
    parallel_for(c.others.size() * n_u, [&](std::size_t t) {
        const std::size_t j = t / n_u, i = t % n_u;
        angle_averaged_cf(1.0 / B[c.others[j]].tx_power_w, c.alpha, c.dist[j],
                          c.u_nodes[i], c.omega, tol, &c.phi[j][i * K]);
    });
    return state_->bs.emplace(b, std::move(c)).first->second;
}

const CoverageEngine::GTable& CoverageEngine::g_table(int b, const ServiceDemand& s) const {
    const auto key = std::make_tuple(b, dbits(s.min_rate_bps), dbits(s.ue_intensity_per_km2));
    auto it = state_->g.find(key);
    if (it != state_->g.end()) return it->second;

    const BsCtx& c = bs_ctx(b);
    const std::size_t n_u = c.u_nodes.size(), K = c.omega.size();
    const double nbar = std::max(1.0, mean_load(s.ue_intensity_per_km2, c.q));
    const double W = c.bandwidth;

    // Rate integral in y = nbar * rho * ln2 / W, so the SINR threshold is
    // T = e^y - 1 and the y-Jacobian cancels the threshold-map derivative:
    //   P(rate <= kappa) = int_0^{y_end} e^y E_u[f_SINR(e^y - 1 | u)] dy.
    // The endpoint stops at the demanded rate or where noise alone already
    // kills essentially all coverage mass, whichever is sooner; panels place
    // one leading piece plus geometric decades so both the near-zero and the
    // saturated regimes resolve within the configured node budget.
    const double u_floor = 1e-3 * c.q;
    const double denom = std::max(c.mu * c.sigma2 * pow_u(u_floor, c.alpha), 1e-290);
    const double y_roof = std::log1p(30.0 / denom);
    const double y_end = std::min(s.min_rate_bps * nbar * kLn2 / W, y_roof);

    // Decade panels resolve the T -> 0 end; the cap on panel width (the SINR
    // transition e^{-m(y) sigma2} has unit scale in y) resolves the top,
    // which otherwise degenerates into one huge panel when y_end is set by
    // the noise roof rather than the demanded rate.
    std::vector<double> ynodes, yweights;
    {
        std::vector<double> yb{0.0};
        for (int p = kRatePanels - 1; p >= 0; --p) yb.push_back(y_end * std::pow(10.0, -p));
        const int pts = std::max(2, cfg_.rate_grid_points / kRatePanels);
        panel_nodes(std::move(yb), 3.0, pts, ynodes, yweights);
    }

    GTable gt;
    const bool with_interference = !c.others.empty() && K >= 2;
    if (with_interference) gt.g.assign(n_u * K, cdouble(0.0, 0.0));
    std::vector<double> fe(n_u, 0.0);
    parallel_for(n_u, [&](std::size_t i) {
        const double u = c.u_nodes[i];
        const double upa = pow_u(u, c.alpha);
        const double wu = c.u_weights[i] * 2.0 * u / (c.q * c.q);
        cdouble* grow = with_interference ? &gt.g[i * K] : nullptr;
        double femp = 0.0;
        for (std::size_t g = 0; g < ynodes.size(); ++g) {
            const double ey = std::exp(ynodes[g]);
            const double T = std::expm1(ynodes[g]);
            const double m = c.mu * T * upa;
            const double emsig = std::exp(-m * c.sigma2);
            if (emsig == 0.0) continue;
            const double base = yweights[g] * ey * wu * c.mu * upa;
            femp += base * c.sigma2 * emsig;
            if (!with_interference) continue;
            const double beta = base * emsig / kPi;
            for (std::size_t k = 0; k + 1 < K; ++k) {
                const cdouble z(m, c.omega[k]);
                const PanelWeights pw =
                    rate_kernel_weights(z, c.omega[k + 1] - c.omega[k], c.sigma2);
                grow[k] += beta * pw.left;
                grow[k + 1] += beta * pw.right;
            }
        }
        fe[i] = femp;
    });
    for (double v : fe) gt.f_empty += v;
    return state_->g.emplace(key, std::move(gt)).first->second;
}

namespace {

double gdot(const std::vector<cdouble>& g, const std::vector<cdouble>& prod) {
    double acc = 0.0;
    const std::size_t n = g.size();
    for (std::size_t t = 0; t < n; ++t)
        acc += g[t].real() * prod[t].real() - g[t].imag() * prod[t].imag();
    return acc;
}

} // namespace

double CoverageEngine::f_mask(int b, const ServiceDemand& s, std::uint32_t subset) const {
    const auto key = std::make_tuple(b, dbits(s.min_rate_bps), dbits(s.ue_intensity_per_km2), subset);
    auto it = state_->fmask.find(key);
    if (it != state_->fmask.end()) return it->second;

    const GTable& gt = g_table(b, s);
    double val;
    if (subset == 0) {
        val = gt.f_empty;
    } else {
        const BsCtx& c = bs_ctx(b);
        std::vector<cdouble> prod;
        bool first = true;
        for (std::size_t bit = 0; bit < c.phi.size(); ++bit) {
            if (!(subset & (1u << bit))) continue;
            if (first) {
                prod = c.phi[bit];
                first = false;
            } else {
                for (std::size_t t = 0; t < prod.size(); ++t) prod[t] *= c.phi[bit][t];
            }
        }
        val = gdot(gt.g, prod);
    }
    state_->fmask.emplace(key, val);
    return val;
}

cdouble CoverageEngine::interferer_cf(int j, int serving, double u, double omega) const {
    const auto& B = scenario_.base_stations;
    const int n = static_cast<int>(B.size());
    if (serving < 0 || serving >= n || j < 0 || j >= n)
        throw ValidationError("interferer_cf: base station index out of range");
    if (j == serving) throw ValidationError("interferer_cf: interferer equals serving BS");
    if (!(u >= 0.0)) throw ValidationError("interferer_cf: serving distance must be >= 0");
    const double d = distance(B[serving].position, B[j].position);
    const std::vector<double> om{omega};
    cdouble out;
    angle_averaged_cf(1.0 / B[j].tx_power_w, scenario_.propagation.pathloss_exponent, d, u,
                      om, std::min(cfg_.rel_tol, 1e-9), &out);
    return out;
}

Density CoverageEngine::interference_pdf(double cval, double u, int serving,
                                         ActiveSet active) const {
    const auto& B = scenario_.base_stations;
    const int n = static_cast<int>(B.size());
    if (serving < 0 || serving >= n)
        throw ValidationError("interference_pdf: base station index out of range");
    if (!(u >= 0.0)) throw ValidationError("interference_pdf: serving distance must be >= 0");
    const ActiveSet mask = active & ~(1u << serving) & ((n >= 32 ? ~0u : (1u << n) - 1u));
    if (mask == 0) return {0.0, true};
    if (cval < 0.0) return {0.0, false};

    std::lock_guard<std::recursive_mutex> lk(state_->mu);
    const BsCtx& c = bs_ctx(serving);
    const std::size_t K = c.omega.size();
    const double tol = std::clamp(cfg_.rel_tol, 1e-12, 1e-6);

    std::vector<cdouble> prod;
    bool first = true;
    for (std::size_t slot = 0; slot < c.others.size(); ++slot) {
        if (!(mask & (1u << c.others[slot]))) continue;
        const auto key = std::make_tuple(serving, static_cast<int>(slot), dbits(u));
        auto it = state_->row.find(key);
        if (it == state_->row.end()) {
            std::vector<cdouble> row(K);
            angle_averaged_cf(1.0 / B[c.others[slot]].tx_power_w, c.alpha, c.dist[slot], u,
                              c.omega, tol, row.data());
            if (state_->row.size() >= 256) state_->row.erase(state_->row.begin());
            it = state_->row.emplace(key, std::move(row)).first;
        }
        if (first) {
            prod = it->second;
            first = false;
        } else {
            for (std::size_t t = 0; t < K; ++t) prod[t] *= it->second[t];
        }
    }

    cdouble acc(0.0, 0.0);
    for (std::size_t k = 0; k + 1 < K; ++k) {
        const PanelWeights pw = phase_weights(cval, c.omega[k], c.omega[k + 1] - c.omega[k]);
        acc += pw.left * prod[k] + pw.right * prod[k + 1];
    }
    return {acc.real() / kPi, false};
}

const std::vector<cdouble>& CoverageEngine::subset_product(int b, std::uint32_t subset) const {
    const auto key = std::make_pair(b, subset);
    auto it = state_->prod.find(key);
    if (it != state_->prod.end()) return it->second;
    const BsCtx& c = bs_ctx(b);
    std::vector<cdouble> prod;
    bool first = true;
    for (std::size_t bit = 0; bit < c.phi.size(); ++bit) {
        if (!(subset & (1u << bit))) continue;
        if (first) {
            prod = c.phi[bit];
            first = false;
        } else {
            for (std::size_t t = 0; t < prod.size(); ++t) prod[t] *= c.phi[bit][t];
        }
    }
    if (state_->prod.size() >= 16) state_->prod.erase(state_->prod.begin());
    return state_->prod.emplace(key, std::move(prod)).first->second;
}

double CoverageEngine::sinr_pdf(double t, int serving, ActiveSet active) const {
    const int n = static_cast<int>(scenario_.base_stations.size());
    if (serving < 0 || serving >= n)
        throw ValidationError("sinr_pdf: base station index out of range");
    if (!(t > 0.0)) return 0.0;
    std::lock_guard<std::recursive_mutex> lk(state_->mu);
    const BsCtx& c = bs_ctx(serving);
    std::uint32_t subset = 0;
    for (std::size_t k = 0; k < c.others.size(); ++k)
        if (active & (1u << c.others[k])) subset |= 1u << k;
    const std::vector<cdouble>* P = subset ? &subset_product(serving, subset) : nullptr;
    const std::size_t K = c.omega.size();
    double total = 0.0;
    for (std::size_t i = 0; i < c.u_nodes.size(); ++i) {
        const double u = c.u_nodes[i];
        const double upa = pow_u(u, c.alpha);
        const double m = c.mu * t * upa;
        const double emsig = std::exp(-m * c.sigma2);
        if (emsig == 0.0) continue;
        double val;
        if (P == nullptr) {
            val = c.mu * upa * c.sigma2 * emsig;
        } else {
            const cdouble* row = P->data() + i * K;
            cdouble acc(0.0, 0.0);
            for (std::size_t k = 0; k + 1 < K; ++k) {
                const cdouble z(m, c.omega[k]);
                const PanelWeights pw =
                    rate_kernel_weights(z, c.omega[k + 1] - c.omega[k], c.sigma2);
                acc += pw.left * row[k] + pw.right * row[k + 1];
            }
            val = c.mu * upa * emsig * acc.real() / kPi;
        }
        total += c.u_weights[i] * 2.0 * u / (c.q * c.q) * val;
    }
    return total;
}

double CoverageEngine::sinr_ccdf(double t, int serving, ActiveSet active) const {
    const int n = static_cast<int>(scenario_.base_stations.size());
    if (serving < 0 || serving >= n)
        throw ValidationError("sinr_ccdf: base station index out of range");
    if (!(t > 0.0)) return 1.0;
    std::lock_guard<std::recursive_mutex> lk(state_->mu);
    const BsCtx& c = bs_ctx(serving);
    std::uint32_t subset = 0;
    for (std::size_t k = 0; k < c.others.size(); ++k)
        if (active & (1u << c.others[k])) subset |= 1u << k;
    const std::vector<cdouble>* P = subset ? &subset_product(serving, subset) : nullptr;
    const std::size_t K = c.omega.size();
    double total = 0.0;
    for (std::size_t i = 0; i < c.u_nodes.size(); ++i) {
        const double u = c.u_nodes[i];
        const double m = c.mu * t * pow_u(u, c.alpha);
        const double emsig = std::exp(-m * c.sigma2);
        if (emsig == 0.0) continue;
        double survive;
        if (P == nullptr) {
            survive = emsig;
        } else {
            const cdouble* row = P->data() + i * K;
            cdouble acc(0.0, 0.0);
            for (std::size_t k = 0; k + 1 < K; ++k) {
                const cdouble z(m, c.omega[k]);
                const PanelWeights p1 = rational1_weights(z, c.omega[k + 1] - c.omega[k]);
                acc += p1.left * row[k] + p1.right * row[k + 1];
            }
            survive = emsig * acc.real() / kPi;
        }
        total += c.u_weights[i] * 2.0 * u / (c.q * c.q) * survive;
    }
    return total;
}

double CoverageEngine::per_bs_coverage(int b, const ServiceDemand& s, ActiveSet active) const {
    const int n = static_cast<int>(scenario_.base_stations.size());
    if (b < 0 || b >= n)
        throw ValidationError("per_bs_coverage: base station index out of range");
    if (!(s.min_rate_bps > 0.0))
        throw ValidationError("per_bs_coverage: min_rate_bps must be > 0");
    if (!(s.ue_intensity_per_km2 >= 0.0))
        throw ValidationError("per_bs_coverage: ue_intensity_per_km2 must be >= 0");
    std::lock_guard<std::recursive_mutex> lk(state_->mu);
    const BsCtx& c = bs_ctx(b);
    std::uint32_t subset = 0;
    for (std::size_t k = 0; k < c.others.size(); ++k)
        if (active & (1u << c.others[k])) subset |= 1u << k;
    return 1.0 - f_mask(b, s, subset);
}

double CoverageEngine::network_coverage(const Allocation& alloc, int sp) const {
    validate_allocation(alloc, scenario_);
    if (sp < 0 || static_cast<std::size_t>(sp) >= scenario_.demands.size())
        throw ValidationError("network_coverage: service provider index out of range");
    std::lock_guard<std::recursive_mutex> lk(state_->mu);
    ActiveSet leased = 0;
    for (std::size_t b = 0; b < alloc.leased.size(); ++b)
        if (alloc.leased[b]) leased |= 1u << b;
    const ServiceDemand& s = scenario_.demands[sp];
    double total = 0.0;
    for (std::size_t b = 0; b < alloc.leased.size(); ++b) {
        if (!alloc.leased[b]) continue;
        const double d = alloc.delta[b][sp];
        if (d == 0.0) continue;
        const BsCtx& c = bs_ctx(static_cast<int>(b));
        std::uint32_t subset = 0;
        for (std::size_t k = 0; k < c.others.size(); ++k)
            if (leased & (1u << c.others[k])) subset |= 1u << k;
        total += d * c.area_weight * (1.0 - f_mask(static_cast<int>(b), s, subset));
    }
    return total;
}

const CoverageEngine::VoronoiCtx& CoverageEngine::voronoi_ctx(int b, const Cell& cell) const {
    const std::uint64_t key = cell_key(b, cell);
    auto it = state_->vor.find(key);
    if (it != state_->vor.end()) return it->second;

    const auto& B = scenario_.base_stations;
    VoronoiCtx v;
    v.area = cell.area;
    const double R = cell.circumradius;

    // Panel breaks where the cell distance density kinks: the perpendicular
    // foot of each edge, every vertex distance, and every interferer ring
    // that crosses the cell.
    std::vector<double> bounds{0.0, R};
    const std::size_t nv = cell.boundary.size();
    for (std::size_t e = 0; e < nv; ++e) {
        const Vec2 v0 = cell.boundary[e] - cell.site;
        const Vec2 v1 = cell.boundary[(e + 1) % nv] - cell.site;
        const Vec2 d = v1 - v0;
        const double len2 = dot(d, d);
        if (len2 > 0.0) {
            const double tfoot = -dot(v0, d) / len2;
            if (tfoot > 0.0 && tfoot < 1.0) {
                const Vec2 foot{v0.x + tfoot * d.x, v0.y + tfoot * d.y};
                bounds.push_back(norm(foot));
            }
        }
        bounds.push_back(norm(v0));
    }
    for (std::size_t j = 0; j < B.size(); ++j) {
        if (static_cast<int>(j) == b) continue;
        const double d = distance(B[b].position, B[j].position);
        if (d > 1e-12 && d < R - 1e-12) bounds.push_back(d);
    }
    for (double& x : bounds) x = std::clamp(x, 0.0, R);
    panel_nodes(std::move(bounds), R / 6.0, kUPanelPoints, v.u_nodes, v.u_weights);

    v.fcell.resize(v.u_nodes.size());
    for (std::size_t i = 0; i < v.u_nodes.size(); ++i)
        v.fcell[i] = cell_distance_pdf(cell, v.u_nodes[i]);

    v.omega = make_omega_grid(scenario_, b, R, cfg_);
    const std::size_t n_u = v.u_nodes.size(), K = v.omega.size();
    const double tol = std::clamp(cfg_.rel_tol, 1e-12, 1e-6);
    if (B.size() > 1) {
        v.phi_all.assign(n_u * K, cdouble(1.0, 0.0));
        std::vector<cdouble> scratch(n_u * K);
        for (std::size_t j = 0; j < B.size(); ++j) {
            if (static_cast<int>(j) == b) continue;
            const double d = distance(B[b].position, B[j].position);
            parallel_for(n_u, [&](std::size_t i) {
                angle_averaged_cf(1.0 / B[j].tx_power_w, scenario_.propagation.pathloss_exponent,
                                  d, v.u_nodes[i], v.omega, tol, &scratch[i * K]);
            });
            for (std::size_t t = 0; t < n_u * K; ++t) v.phi_all[t] *= scratch[t];
        }
    }
    return state_->vor.emplace(key, std::move(v)).first->second;
}

double CoverageEngine::voronoi_bs_coverage(int b, const ServiceDemand& s,
                                           const Cell& cell) const {
    const auto& B = scenario_.base_stations;
    if (b < 0 || b >= static_cast<int>(B.size()))
        throw ValidationError("voronoi_bs_coverage: base station index out of range");
    if (cell.site_index != b || distance(cell.site, B[b].position) > 1e-9)
        throw ValidationError("voronoi_bs_coverage: cell site does not match the base station");
    if (!(s.min_rate_bps > 0.0))
        throw ValidationError("voronoi_bs_coverage: min_rate_bps must be > 0");
    if (!(s.ue_intensity_per_km2 >= 0.0))
        throw ValidationError("voronoi_bs_coverage: ue_intensity_per_km2 must be >= 0");

    std::lock_guard<std::recursive_mutex> lk(state_->mu);
    const auto memo_key = std::make_tuple(cell_key(b, cell), dbits(s.min_rate_bps),
                                          dbits(s.ue_intensity_per_km2));
    auto mit = state_->vor_cov.find(memo_key);
    if (mit != state_->vor_cov.end()) return mit->second;

    const VoronoiCtx& v = voronoi_ctx(b, cell);
    const double mu = 1.0 / B[b].tx_power_w;
    const double sigma2 = scenario_.noise_power_w(b);
    const double alpha = scenario_.propagation.pathloss_exponent;
    const double W = B[b].bandwidth_hz;
    const std::size_t K = v.omega.size();

    const double nu = s.ue_intensity_per_km2 * v.area;
    double cov = 0.0;
    for (const auto& [load, p] : truncated_load_pmf(nu, cfg_.poisson_tail_eps)) {
        const double x = load * s.min_rate_bps / W;
        const double T = std::exp2(std::min(x, 1020.0)) - 1.0;
        double sn = 0.0;
        for (std::size_t i = 0; i < v.u_nodes.size(); ++i) {
            const double m = mu * T * pow_u(v.u_nodes[i], alpha);
            const double emsig = std::exp(-m * sigma2);
            if (emsig == 0.0) continue;
            double survive;
            if (v.phi_all.empty()) {
                survive = emsig;
            } else {
                const cdouble* row = v.phi_all.data() + i * K;
                cdouble acc(0.0, 0.0);
                for (std::size_t k = 0; k + 1 < K; ++k) {
                    const cdouble z(m, v.omega[k]);
                    const PanelWeights p1 = rational1_weights(z, v.omega[k + 1] - v.omega[k]);
                    acc += p1.left * row[k] + p1.right * row[k + 1];
                }
                survive = emsig * acc.real() / kPi;
            }
            sn += v.u_weights[i] * v.fcell[i] * survive;
        }
        cov += p * sn;
    }
    const double result = v.area / scenario_.region.area() * cov;
    state_->vor_cov.emplace(memo_key, result);
    return result;
}

double CoverageEngine::voronoi_rate_coverage(const Allocation& alloc, int sp,
                                             const std::vector<Cell>& cells) const {
    validate_allocation(alloc, scenario_);
    const auto& B = scenario_.base_stations;
    if (sp < 0 || static_cast<std::size_t>(sp) >= scenario_.demands.size())
        throw ValidationError("voronoi_rate_coverage: service provider index out of range");
    if (cells.size() != B.size())
        throw ValidationError("voronoi_rate_coverage: need one cell per base station");
    for (std::size_t b = 0; b < B.size(); ++b) {
        if (!alloc.leased[b])
            throw ValidationError("voronoi_rate_coverage requires every base station leased");
        if (cells[b].site_index != static_cast<int>(b) ||
            distance(cells[b].site, B[b].position) > 1e-9)
            throw ValidationError("voronoi_rate_coverage: cell sites must match base stations in order");
    }
    const ServiceDemand& s = scenario_.demands[sp];
    double total = 0.0;
    for (std::size_t b = 0; b < B.size(); ++b) {
        const double d = alloc.delta[b][sp];
        if (d == 0.0) continue;
        total += d * voronoi_bs_coverage(static_cast<int>(b), s, cells[b]);
    }
    return total;
}

CoverageCoefficients CoverageEngine::precompute_coefficients() const {
    std::lock_guard<std::recursive_mutex> lk(state_->mu);
    const std::size_t n_bs = scenario_.base_stations.size();
    const std::size_t n_sp = scenario_.demands.size();
    CoverageCoefficients out;
    out.bs_count = n_bs;
    out.sp_count = n_sp;
    out.area_weight.resize(n_bs);
    out.others.resize(n_bs);
    out.coeff.assign(n_bs, std::vector<std::vector<double>>(n_sp));

    for (std::size_t b = 0; b < n_bs; ++b) {
        const BsCtx& c = bs_ctx(static_cast<int>(b));
        const int n = static_cast<int>(c.others.size());
        if (n > cfg_.max_expansion_size)
            throw ValidationError("subset expansion over " + std::to_string(n) +
                                  " interferers exceeds max_expansion_size (" +
                                  std::to_string(cfg_.max_expansion_size) + ")");
        out.area_weight[b] = c.area_weight;
        out.others[b] = c.others;

        std::vector<const GTable*> gts(n_sp);
        std::vector<std::tuple<int, std::uint64_t, std::uint64_t, std::uint32_t>> keys(n_sp);
        for (std::size_t sp = 0; sp < n_sp; ++sp) {
            const ServiceDemand& s = scenario_.demands[sp];
            gts[sp] = &g_table(static_cast<int>(b), s);
            keys[sp] = std::make_tuple(static_cast<int>(b), dbits(s.min_rate_bps),
                                       dbits(s.ue_intensity_per_km2), 0u);
        }

        const std::uint32_t total = 1u << n;
        std::vector<std::vector<double>> F(n_sp, std::vector<double>(total));
        std::vector<std::vector<cdouble>> scratch(n);

        // Depth-first walk over interferer subsets, extending the CF product
        // one ascending bit at a time so each product is built exactly the
        // same way as the single-subset path in f_mask.
        const std::function<void(int, std::uint32_t, int)> visit =
            [&](int next, std::uint32_t mask, int depth) {
                for (std::size_t sp = 0; sp < n_sp; ++sp) {
                    const double val = depth == 0 ? gts[sp]->f_empty
                                                  : gdot(gts[sp]->g, scratch[depth - 1]);
                    F[sp][mask] = val;
                    auto key = keys[sp];
                    std::get<3>(key) = mask;
                    state_->fmask.emplace(key, val);
                }
                for (int bit = next; bit < n; ++bit) {
                    std::vector<cdouble>& dst = scratch[depth];
                    const std::vector<cdouble>& src = c.phi[bit];
                    if (depth == 0) {
                        dst = src;
                    } else {
                        const std::vector<cdouble>& base = scratch[depth - 1];
                        dst.resize(base.size());
                        for (std::size_t t = 0; t < base.size(); ++t) dst[t] = base[t] * src[t];
                    }
                    visit(bit + 1, mask | (1u << bit), depth + 1);
                }
            };
        visit(0, 0u, 0);

        // Moebius inversion per SP turns F(superset products) into the
        // inclusion-exclusion terms I(J); the expansion coefficient of the
        // empty set keeps the +1, every other subset enters negated.
        for (std::size_t sp = 0; sp < n_sp; ++sp) {
            std::vector<double> I = F[sp];
            for (int bit = 0; bit < n; ++bit)
                for (std::uint32_t m = 0; m < total; ++m)
                    if (m & (1u << bit)) I[m] -= I[m ^ (1u << bit)];
            std::vector<double>& cf = out.coeff[b][sp];
            cf.resize(total);
            cf[0] = c.area_weight * (1.0 - I[0]);
            for (std::uint32_t m = 1; m < total; ++m) cf[m] = -c.area_weight * I[m];
        }
    }
    return out;
}

bool CoverageEngine::load_coefficients(const std::string& path, CoverageCoefficients& out) const {
    std::ifstream f(path);
    if (!f) return false;
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw ParseError(std::string("coefficient cache: ") + e.what());
    }
    try {
        if (!j.is_object() || j.value("format_version", 0) != 1) return false;
        if (j.at("scenario_hash").get<std::uint64_t>() != scenario_content_hash(scenario_))
            return false;
        const auto& jc = j.at("config");
        if (jc.at("omega_max").get<double>() != cfg_.omega_max) return false;
        if (jc.at("rel_tol").get<double>() != cfg_.rel_tol) return false;
        if (jc.at("abs_tol").get<double>() != cfg_.abs_tol) return false;
        if (jc.at("poisson_tail_eps").get<double>() != cfg_.poisson_tail_eps) return false;
        if (jc.at("rate_grid_points").get<int>() != cfg_.rate_grid_points) return false;
        if (jc.at("max_expansion_size").get<int>() != cfg_.max_expansion_size) return false;

        CoverageCoefficients c;
        c.bs_count = j.at("bs_count").get<std::size_t>();
        c.sp_count = j.at("sp_count").get<std::size_t>();
        if (c.bs_count != scenario_.base_stations.size() ||
            c.sp_count != scenario_.demands.size())
            return false;
        c.area_weight = j.at("area_weight").get<std::vector<double>>();
        c.others = j.at("others").get<std::vector<std::vector<int>>>();
        c.coeff = j.at("coeff").get<std::vector<std::vector<std::vector<double>>>>();
        if (c.area_weight.size() != c.bs_count || c.others.size() != c.bs_count ||
            c.coeff.size() != c.bs_count)
            throw ParseError("coefficient cache: inconsistent shapes");
        for (std::size_t b = 0; b < c.bs_count; ++b) {
            if (c.coeff[b].size() != c.sp_count)
                throw ParseError("coefficient cache: inconsistent shapes");
            const std::size_t want = std::size_t{1} << c.others[b].size();
            for (const auto& v : c.coeff[b])
                if (v.size() != want) throw ParseError("coefficient cache: inconsistent shapes");
        }
        out = std::move(c);
        return true;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("coefficient cache: ") + e.what());
    }
}

void CoverageEngine::save_coefficients(const std::string& path,
                                       const CoverageCoefficients& c) const {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["scenario_hash"] = scenario_content_hash(scenario_);
    j["config"] = {{"omega_max", cfg_.omega_max},
                   {"rel_tol", cfg_.rel_tol},
                   {"abs_tol", cfg_.abs_tol},
                   {"poisson_tail_eps", cfg_.poisson_tail_eps},
                   {"rate_grid_points", cfg_.rate_grid_points},
                   {"max_expansion_size", cfg_.max_expansion_size}};
    j["bs_count"] = c.bs_count;
    j["sp_count"] = c.sp_count;
    j["area_weight"] = c.area_weight;
    j["others"] = c.others;
    j["coeff"] = c.coeff;
    std::ofstream f(path);
    if (!f) throw ValidationError("cannot write coefficient cache: " + path);
    f << j.dump() << "\n";
}

} // namespace vnet
