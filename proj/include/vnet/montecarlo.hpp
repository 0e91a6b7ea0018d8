#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vnet/coverage.hpp"
#include "vnet/scenario.hpp"

namespace vnet {

/// How the simulated UE picks its serving BS.
enum class AssociationMode {
    voronoi,  // nearest leased BS; interferers at their true distances
    circular, // coverage-disc model: serving disc drawn by area, uniform angles
};

/// How the slice fraction delta_bs enters the rate check.
enum class SliceMode {
    access_probability, // Bernoulli(delta) access gate; no access -> rate 0
    rate_scaling,       // always served, rate multiplied by delta
};

struct TrialConfig {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    AssociationMode association_mode = AssociationMode::voronoi;
    SliceMode slice_mode = SliceMode::access_probability;
    // When non-empty, writes one CSV row per trial:
    // trial,serving_bs,u_km,load,sinr,rate_bps,accessed,success
    std::string dump_csv_path;

    void validate() const; // throws ValidationError (trials >= 1)
};

struct CoverageEstimate {
    double mean = 0.0;
    double ci_low = 0.0;  // 95% Wilson interval
    double ci_high = 0.0;
    std::uint64_t trials = 0;
};

/// Direct simulation of the rate-coverage probability of SP `sp` under
/// `alloc`: drop a UE uniformly, associate per the configured mode, draw
/// fading and the Poisson cell/disc load, and test the achieved rate against
/// the SP's floor. The SP is matched to the scenario's demand list by sp_id
/// (sweeps pass modified copies). Trial t draws from Substream(seed, t), so
/// the estimate is byte-identical for a fixed seed regardless of worker
/// count.
CoverageEstimate simulate_coverage(const Scenario& scenario, const Allocation& alloc,
                                   const ServiceDemand& sp, const TrialConfig& tc);

/// I.i.d. SINR draws under the coverage-disc model for a UE served by BS
/// `serving` with interferers `active` (bitmask over BS indices; the serving
/// bit is ignored). Sample i draws from Substream(seed, i): deterministic
/// and order-stable.
std::vector<double> simulate_sinr_samples(const Scenario& scenario, int serving,
                                          ActiveSet active, std::size_t n,
                                          std::uint64_t seed);

} // namespace vnet
