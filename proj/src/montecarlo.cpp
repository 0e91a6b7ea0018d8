#include "vnet/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "vnet/errors.hpp"
#include "vnet/geometry.hpp"
#include "vnet/parallel.hpp"
#include "vnet/rng.hpp"

namespace vnet {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZ95 = 1.959963984540054;

struct TrialRow {
    std::uint64_t trial = 0;
    int serving_bs = -1; // BS id, -1 when no BS is leased
    double u_km = 0.0;
    std::uint64_t load = 0;
    double sinr = 0.0;
    double rate_bps = 0.0;
    std::uint8_t accessed = 0;
    std::uint8_t success = 0;
};

CoverageEstimate wilson(std::uint64_t hits, std::uint64_t n) {
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(hits) / nn;
    const double z2 = kZ95 * kZ95;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half =
        kZ95 * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    CoverageEstimate est;
    est.mean = p;
    est.ci_low = std::max(0.0, center - half);
    est.ci_high = std::min(1.0, center + half);
    est.trials = n;
    return est;
}

void dump_rows(const std::string& path, const std::vector<TrialRow>& rows) {
    std::ofstream out(path);
    if (!out) throw ParseError("trial dump: cannot write " + path);
    out << "trial,serving_bs,u_km,load,sinr,rate_bps,accessed,success\n";
    char buf[160];
    for (const TrialRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%llu,%d,%.9g,%llu,%.9g,%.9g,%u,%u\n",
                      static_cast<unsigned long long>(r.trial), r.serving_bs, r.u_km,
                      static_cast<unsigned long long>(r.load), r.sinr, r.rate_bps,
                      static_cast<unsigned>(r.accessed), static_cast<unsigned>(r.success));
        out << buf;
    }
}

int demand_index(const Scenario& sc, const ServiceDemand& sp) {
    for (std::size_t s = 0; s < sc.demands.size(); ++s)
        if (sc.demands[s].sp_id == sp.sp_id) return static_cast<int>(s);
    throw ValidationError("simulate_coverage: demand sp_id " + std::to_string(sp.sp_id) +
                          " is not part of the scenario");
}

} // namespace

void TrialConfig::validate() const {
    if (trials < 1) throw ValidationError("TrialConfig.trials must be >= 1");
}

CoverageEstimate simulate_coverage(const Scenario& scenario, const Allocation& alloc,
                                   const ServiceDemand& sp, const TrialConfig& tc) {
    tc.validate();
    validate_scenario(scenario);
    validate_allocation(alloc, scenario);
    const int sp_idx = demand_index(scenario, sp);
    const double alpha = scenario.propagation.pathloss_exponent;
    const bool gate = tc.slice_mode == SliceMode::access_probability;
    const std::uint64_t n = tc.trials;

    std::vector<int> leased;
    for (std::size_t b = 0; b < scenario.base_stations.size(); ++b)
        if (alloc.leased[b]) leased.push_back(static_cast<int>(b));

    std::vector<TrialRow> rows;
    const bool dump = !tc.dump_csv_path.empty();
    if (dump) rows.resize(n);

    if (leased.empty()) {
        // Nothing to associate with: every trial fails.
        if (dump) {
            for (std::uint64_t t = 0; t < n; ++t) rows[t].trial = t;
            dump_rows(tc.dump_csv_path, rows);
        }
        return wilson(0, n);
    }

    // Per-leased-BS constants. The voronoi mode tessellates the leased sites
    // only (the UE cannot associate with an unleased BS); the circular mode
    // draws the serving disc proportionally to its area.
    const std::size_t nl = leased.size();
    std::vector<double> load_mean(nl), disc_cum(nl), noise(nl), delta(nl);
    std::vector<Vec2> sites(nl);
    double disc_total = 0.0;
    for (std::size_t k = 0; k < nl; ++k) {
        const BaseStation& bs = scenario.base_stations[leased[k]];
        sites[k] = bs.position;
        noise[k] = scenario.noise_power_w(leased[k]);
        delta[k] = alloc.delta[leased[k]][sp_idx];
        disc_total += kPi * bs.coverage_radius_km * bs.coverage_radius_km;
        disc_cum[k] = disc_total;
    }
    const bool voronoi = tc.association_mode == AssociationMode::voronoi;
    std::vector<Cell> cells;
    if (voronoi) {
        cells = voronoi_tessellation(sites, scenario.region);
        for (std::size_t k = 0; k < nl; ++k)
            load_mean[k] = sp.ue_intensity_per_km2 * cells[k].area;
    } else {
        for (std::size_t k = 0; k < nl; ++k) {
            const double q = scenario.base_stations[leased[k]].coverage_radius_km;
            load_mean[k] = sp.ue_intensity_per_km2 * kPi * q * q;
        }
    }

    // Trials are grouped into fixed blocks whose hit counts are integers, so
    // the total is exact and independent of scheduling.
    const std::size_t n_blocks = std::min<std::uint64_t>(n, 256);
    const std::uint64_t per_block = (n + n_blocks - 1) / n_blocks;
    std::vector<std::uint64_t> block_hits(n_blocks, 0);

    parallel_for(n_blocks, [&](std::size_t blk) {
        const std::uint64_t t0 = blk * per_block;
        const std::uint64_t t1 = std::min<std::uint64_t>(n, t0 + per_block);
        std::uint64_t hits = 0;
        for (std::uint64_t t = t0; t < t1; ++t) {
            Substream rng(tc.seed, t);
            TrialRow row;
            row.trial = t;

            // Serving BS and distance.
            std::size_t k = 0;
            double u = 0.0;
            Vec2 ue{};
            if (voronoi) {
                ue = {rng.uniform(0.0, scenario.region.width),
                      rng.uniform(0.0, scenario.region.height)};
                double best = 1e300;
                for (std::size_t j = 0; j < nl; ++j) {
                    const double d = distance(ue, sites[j]);
                    if (d < best) {
                        best = d;
                        k = j;
                    }
                }
                u = best;
            } else {
                const double pick = rng.uniform(0.0, disc_total);
                k = std::lower_bound(disc_cum.begin(), disc_cum.end(), pick) -
                    disc_cum.begin();
                if (k >= nl) k = nl - 1;
                const double q = scenario.base_stations[leased[k]].coverage_radius_km;
                u = q * std::sqrt(rng.uniform());
            }
            const BaseStation& bs = scenario.base_stations[leased[k]];
            row.serving_bs = bs.id;
            row.u_km = u;

            // Slice access. The gate variate is drawn in both slice modes so
            // the channel draws that follow are identical across modes; a
            // failed access leaves the row's channel fields zero.
            const double gate_draw = rng.uniform();
            row.accessed = 1;
            if (gate && gate_draw >= delta[k]) {
                row.accessed = 0;
                if (dump) rows[t] = row;
                continue;
            }

            // Fading and interference from the other leased BSs: true
            // UE-to-BS distances under voronoi association, uniform-angle
            // distances from the serving site in the disc model.
            const double h = rng.exponential(bs.tx_power_w);
            double interference = 0.0;
            for (std::size_t j = 0; j < nl; ++j) {
                if (j == k) continue;
                const double pj = scenario.base_stations[leased[j]].tx_power_w;
                if (voronoi) {
                    const double r = distance(ue, sites[j]);
                    interference += rng.exponential(pj) * std::pow(r, -alpha);
                } else {
                    const double d = distance(sites[k], sites[j]);
                    const double th = rng.uniform(0.0, 2.0 * kPi);
                    const double r2 = u * u + d * d - 2.0 * u * d * std::cos(th);
                    interference += rng.exponential(pj) * std::pow(r2, -0.5 * alpha);
                }
            }
            row.load = 1 + rng.poisson(load_mean[k]);

            const double signal = h * std::pow(u, -alpha);
            const double sinr = signal / (noise[k] + interference);
            row.sinr = sinr;
            double rate = bs.bandwidth_hz / static_cast<double>(row.load) *
                          std::log2(1.0 + sinr);
            if (!gate) rate *= delta[k];
            row.rate_bps = rate;
            row.success = rate >= sp.min_rate_bps ? 1 : 0;
            hits += row.success;
            if (dump) rows[t] = row;
        }
        block_hits[blk] = hits;
    });

    std::uint64_t hits = 0;
    for (std::uint64_t h : block_hits) hits += h;
    if (dump) dump_rows(tc.dump_csv_path, rows);

    CoverageEstimate est = wilson(hits, n);
    if (!voronoi) {
        // The disc model only describes UEs that land inside some disc; the
        // remaining area mass counts as uncovered.
        const double scale = disc_total / scenario.region.area();
        est.mean = std::min(1.0, est.mean * scale);
        est.ci_low = std::min(1.0, est.ci_low * scale);
        est.ci_high = std::min(1.0, est.ci_high * scale);
    }
    return est;
}

std::vector<double> simulate_sinr_samples(const Scenario& scenario, int serving,
                                          ActiveSet active, std::size_t n,
                                          std::uint64_t seed) {
    validate_scenario(scenario);
    if (n < 1) throw ValidationError("simulate_sinr_samples: n must be >= 1");
    const int nb = static_cast<int>(scenario.base_stations.size());
    if (serving < 0 || serving >= nb)
        throw ValidationError("simulate_sinr_samples: serving index out of range");
    const BaseStation& bs = scenario.base_stations[serving];
    const double alpha = scenario.propagation.pathloss_exponent;
    const double noise = scenario.noise_power_w(serving);

    std::vector<int> inter;
    std::vector<double> dist;
    for (int j = 0; j < nb; ++j) {
        if (j == serving || !(active & (1u << j))) continue;
        inter.push_back(j);
        dist.push_back(distance(bs.position, scenario.base_stations[j].position));
    }

    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) {
        Substream rng(seed, i);
        const double u = bs.coverage_radius_km * std::sqrt(rng.uniform());
        const double h = rng.exponential(bs.tx_power_w);
        double interference = 0.0;
        for (std::size_t m = 0; m < inter.size(); ++m) {
            const double th = rng.uniform(0.0, 2.0 * kPi);
            const double d = dist[m];
            const double r2 = u * u + d * d - 2.0 * u * d * std::cos(th);
            const double g =
                rng.exponential(scenario.base_stations[inter[m]].tx_power_w);
            interference += g * std::pow(r2, -0.5 * alpha);
        }
        out[i] = h * std::pow(u, -alpha) / (noise + interference);
    });
    return out;
}

} // namespace vnet
