#include "vnet/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vnet/rng.hpp"

namespace vnet {

using json = nlohmann::ordered_json;

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double Scenario::noise_power_w(int bs_index) const {
    return dbm_to_watts(propagation.noise_psd_dbm_hz) * base_stations.at(bs_index).bandwidth_hz;
}

void validate_scenario(const Scenario& s) {
    auto fail = [](const std::string& m) { throw ValidationError("scenario: " + m); };
    if (s.region.width <= 0.0 || s.region.height <= 0.0) fail("region dimensions must be > 0");
    if (s.base_stations.empty()) fail("base_stations must be non-empty");
    if (s.demands.empty()) fail("service_providers must be non-empty");
    if (s.propagation.pathloss_exponent <= 2.0)
        fail("pathloss_exponent must be > 2 (interference integrals diverge otherwise)");
    std::set<int> bs_ids;
    for (const auto& b : s.base_stations) {
        const std::string tag = "base_station id " + std::to_string(b.id) + ": ";
        if (!bs_ids.insert(b.id).second) fail(tag + "duplicate id");
        if (!s.region.contains(b.position)) fail(tag + "position outside region");
        if (b.coverage_radius_km <= 0.0) fail(tag + "coverage_radius_km must be > 0");
        if (b.bandwidth_hz <= 0.0) fail(tag + "bandwidth_mhz must be > 0");
        if (b.tx_power_w <= 0.0) fail(tag + "tx_power_dbm yields non-positive watts");
        if (b.lease_cost < 0.0) fail(tag + "lease_cost must be >= 0");
    }
    for (std::size_t i = 0; i < s.base_stations.size(); ++i)
        for (std::size_t j = i + 1; j < s.base_stations.size(); ++j)
            if (distance(s.base_stations[i].position, s.base_stations[j].position) < 1e-9)
                fail("base stations " + std::to_string(s.base_stations[i].id) + "," +
                     std::to_string(s.base_stations[j].id) + " are degenerate (separation < 1e-9 km)");
    std::set<int> sp_ids, ranks;
    for (const auto& d : s.demands) {
        const std::string tag = "service_provider id " + std::to_string(d.sp_id) + ": ";
        if (!sp_ids.insert(d.sp_id).second) fail(tag + "duplicate id");
        if (d.min_rate_bps <= 0.0) fail(tag + "min_rate_kbps must be > 0");
        if (d.min_coverage_prob <= 0.0 || d.min_coverage_prob >= 1.0)
            fail(tag + "min_coverage_prob must lie in (0,1)");
        if (d.ue_intensity_per_km2 <= 0.0) fail(tag + "ue_intensity_per_km2 must be > 0");
        if (!ranks.insert(d.priority_rank).second) fail(tag + "priority_rank must be unique");
    }
}

namespace {

double require_number(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError("scenario: missing numeric field '" + key + "' in " + ctx);
    return j[key].get<double>();
}

} // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
        throw ParseError("scenario: unsupported or missing format_version (expected 1)");
    Scenario s;
    const auto& reg = j.at("region");
    s.region.width = require_number(reg, "width_km", "region");
    s.region.height = require_number(reg, "height_km", "region");
    const auto& prop = j.at("propagation");
    s.propagation.pathloss_exponent = require_number(prop, "pathloss_exponent", "propagation");
    s.propagation.noise_psd_dbm_hz = require_number(prop, "noise_psd_dbm_per_hz", "propagation");
    if (!j.contains("base_stations") || !j["base_stations"].is_array())
        throw ParseError("scenario: missing base_stations array");
    for (const auto& jb : j["base_stations"]) {
        BaseStation b;
        b.id = static_cast<int>(require_number(jb, "id", "base_station"));
        b.provider_id = jb.contains("provider_id") ? jb["provider_id"].get<int>() : 0;
        b.position = {require_number(jb, "x_km", "base_station"),
                      require_number(jb, "y_km", "base_station")};
        b.tx_power_dbm = require_number(jb, "tx_power_dbm", "base_station");
        b.tx_power_w = dbm_to_watts(b.tx_power_dbm);
        b.bandwidth_hz = require_number(jb, "bandwidth_mhz", "base_station") * 1e6;
        b.coverage_radius_km = require_number(jb, "coverage_radius_km", "base_station");
        b.lease_cost = require_number(jb, "lease_cost", "base_station");
        s.base_stations.push_back(b);
    }
    if (!j.contains("service_providers") || !j["service_providers"].is_array())
        throw ParseError("scenario: missing service_providers array");
    for (const auto& jd : j["service_providers"]) {
        ServiceDemand d;
        d.sp_id = static_cast<int>(require_number(jd, "id", "service_provider"));
        d.min_rate_bps = require_number(jd, "min_rate_kbps", "service_provider") * 1e3;
        d.min_coverage_prob = require_number(jd, "min_coverage_prob", "service_provider");
        d.ue_intensity_per_km2 = require_number(jd, "ue_intensity_per_km2", "service_provider");
        d.priority_rank = static_cast<int>(require_number(jd, "priority_rank", "service_provider"));
        s.demands.push_back(d);
    }
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("scenario: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["format_version"] = 1;
    j["region"] = {{"width_km", s.region.width}, {"height_km", s.region.height}};
    j["propagation"] = {{"pathloss_exponent", s.propagation.pathloss_exponent},
                        {"noise_psd_dbm_per_hz", s.propagation.noise_psd_dbm_hz}};
    j["base_stations"] = json::array();
    for (const auto& b : s.base_stations) {
        j["base_stations"].push_back({{"id", b.id},
                                      {"provider_id", b.provider_id},
                                      {"x_km", b.position.x},
                                      {"y_km", b.position.y},
                                      {"tx_power_dbm", b.tx_power_dbm},
                                      {"bandwidth_mhz", b.bandwidth_hz / 1e6},
                                      {"coverage_radius_km", b.coverage_radius_km},
                                      {"lease_cost", b.lease_cost}});
    }
    j["service_providers"] = json::array();
    for (const auto& d : s.demands) {
        j["service_providers"].push_back({{"id", d.sp_id},
                                          {"min_rate_kbps", d.min_rate_bps / 1e3},
                                          {"min_coverage_prob", d.min_coverage_prob},
                                          {"ue_intensity_per_km2", d.ue_intensity_per_km2},
                                          {"priority_rank", d.priority_rank}});
    }
    return j.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("scenario: cannot write " + path);
    out << scenario_to_json_text(s);
}

std::uint64_t scenario_content_hash(const Scenario& s) {
    const std::string text = scenario_to_json_text(s);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<Vec2> sample_ppp(double intensity_per_km2, const Rect& region, std::uint64_t seed) {
    if (intensity_per_km2 < 0.0) throw ValidationError("sample_ppp: intensity must be >= 0");
    Substream rng(seed, 0);
    const std::uint64_t n = rng.poisson(intensity_per_km2 * region.area());
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = {rng.uniform(0.0, region.width), rng.uniform(0.0, region.height)};
    return pts;
}

double Allocation::lease_cost(const Scenario& s) const {
    double c = 0.0;
    for (std::size_t b = 0; b < leased.size(); ++b)
        if (leased[b]) c += s.base_stations[b].lease_cost;
    return c;
}

Allocation Allocation::empty(const Scenario& s) {
    Allocation a;
    a.leased.assign(s.base_stations.size(), 0);
    a.delta.assign(s.base_stations.size(), std::vector<double>(s.demands.size(), 0.0));
    return a;
}

Allocation Allocation::equal_split_all(const Scenario& s) {
    Allocation a = empty(s);
    const double share = 1.0 / static_cast<double>(s.demands.size());
    for (std::size_t b = 0; b < a.leased.size(); ++b) {
        a.leased[b] = 1;
        for (auto& d : a.delta[b]) d = share;
    }
    return a;
}

void validate_allocation(const Allocation& a, const Scenario& s) {
    auto fail = [](const std::string& m) { throw ValidationError("allocation: " + m); };
    const std::size_t nb = s.base_stations.size(), ns = s.demands.size();
    if (a.leased.size() != nb || a.delta.size() != nb) fail("shape mismatch with scenario");
    constexpr double eps = 1e-9;
    for (std::size_t b = 0; b < nb; ++b) {
        if (a.delta[b].size() != ns) fail("shape mismatch with scenario");
        double sum = 0.0;
        for (std::size_t sp = 0; sp < ns; ++sp) {
            const double d = a.delta[b][sp];
            if (d < -eps || d > 1.0 + eps)
                fail("delta[" + std::to_string(s.base_stations[b].id) + "][" +
                     std::to_string(s.demands[sp].sp_id) + "] outside [0,1]");
            if (d > eps && !a.leased[b])
                fail("slice on unleased base station " + std::to_string(s.base_stations[b].id));
            sum += d;
        }
        if (sum > 1.0 + eps)
            fail("slices of base station " + std::to_string(s.base_stations[b].id) +
                 " sum to " + std::to_string(sum) + " > 1");
        if (a.leased[b] && sum <= eps)
            fail("base station " + std::to_string(s.base_stations[b].id) +
                 " leased but carries no slice");
    }
}

std::string allocation_to_json_text(const Allocation& a, const Scenario& s) {
    json j;
    j["format_version"] = 1;
    j["leased_bs_ids"] = json::array();
    for (std::size_t b = 0; b < a.leased.size(); ++b)
        if (a.leased[b]) j["leased_bs_ids"].push_back(s.base_stations[b].id);
    j["slices"] = json::array();
    for (std::size_t b = 0; b < a.delta.size(); ++b)
        for (std::size_t sp = 0; sp < a.delta[b].size(); ++sp)
            if (a.delta[b][sp] != 0.0)
                j["slices"].push_back({{"bs_id", s.base_stations[b].id},
                                       {"sp_id", s.demands[sp].sp_id},
                                       {"delta", a.delta[b][sp]}});
    return j.dump(2) + "\n";
}

Allocation load_allocation(const std::string& path, const Scenario& s) {
    std::ifstream in(path);
    if (!in) throw ParseError("allocation: cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw ParseError(std::string("allocation: invalid JSON: ") + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != 1)
        throw ParseError("allocation: unsupported or missing format_version (expected 1)");
    Allocation a = Allocation::empty(s);
    auto bs_index = [&](int id) -> std::size_t {
        for (std::size_t b = 0; b < s.base_stations.size(); ++b)
            if (s.base_stations[b].id == id) return b;
        throw ParseError("allocation: unknown bs_id " + std::to_string(id));
    };
    auto sp_index = [&](int id) -> std::size_t {
        for (std::size_t sp = 0; sp < s.demands.size(); ++sp)
            if (s.demands[sp].sp_id == id) return sp;
        throw ParseError("allocation: unknown sp_id " + std::to_string(id));
    };
    for (const auto& id : j.at("leased_bs_ids")) a.leased[bs_index(id.get<int>())] = 1;
    for (const auto& sl : j.at("slices"))
        a.delta[bs_index(sl.at("bs_id").get<int>())][sp_index(sl.at("sp_id").get<int>())] =
            sl.at("delta").get<double>();
    validate_allocation(a, s);
    return a;
}

void save_allocation(const Allocation& a, const Scenario& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("allocation: cannot write " + path);
    out << allocation_to_json_text(a, s);
}

} // namespace vnet
