#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vnet/geometry.hpp"

namespace vnet {

struct BaseStation {
    int id = 0;
    int provider_id = 0;
    Vec2 position;              // km
    double tx_power_dbm = 0.0;
    double tx_power_w = 0.0;    // derived at load
    double bandwidth_hz = 0.0;
    double coverage_radius_km = 0.0;
    double lease_cost = 0.0;
};

struct ServiceDemand {
    int sp_id = 0;
    double min_rate_bps = 0.0;       // kappa_s
    double min_coverage_prob = 0.0;  // beta_s
    double ue_intensity_per_km2 = 0.0;
    int priority_rank = 0;           // 1 = highest
};

struct Propagation {
    double pathloss_exponent = 4.0;      // alpha
    double noise_psd_dbm_hz = -174.0;    // thermal noise density
};

struct Scenario {
    Rect region;
    Propagation propagation;
    std::vector<BaseStation> base_stations;
    std::vector<ServiceDemand> demands;

    // Per-BS noise power in watts: psd (W/Hz) * bandwidth.
    double noise_power_w(int bs_index) const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Throws ValidationError naming the violated field.
void validate_scenario(const Scenario& s);

Scenario load_scenario(const std::string& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);
void save_scenario(const Scenario& s, const std::string& path);

// FNV-1a over the canonical serialized form; keys coefficient sidecar files.
std::uint64_t scenario_content_hash(const Scenario& s);

// Homogeneous PPP on the region: Poisson(intensity * area) points placed
// uniformly. Deterministic in the seed.
std::vector<Vec2> sample_ppp(double intensity_per_km2, const Rect& region, std::uint64_t seed);

// A leasing-and-slicing decision: which BSs are leased and the time fraction
// delta[b][s] of BS b dedicated to SP s.
struct Allocation {
    std::vector<std::uint8_t> leased;       // len |B|
    std::vector<std::vector<double>> delta; // |B| x |S|

    double lease_cost(const Scenario& s) const;
    static Allocation empty(const Scenario& s);
    static Allocation equal_split_all(const Scenario& s); // every BS, delta = 1/|S|
};

// Invariant checks: shapes match, delta in [0,1], sum_s delta[b][s] <= 1,
// delta[b][s] > 0 only on leased b, every leased b carries some slice.
void validate_allocation(const Allocation& a, const Scenario& s);

Allocation load_allocation(const std::string& path, const Scenario& s);
std::string allocation_to_json_text(const Allocation& a, const Scenario& s);
void save_allocation(const Allocation& a, const Scenario& s, const std::string& path);

} // namespace vnet
