#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "vnet/geometry.hpp"
#include "vnet/quadrature.hpp"
#include "vnet/scenario.hpp"

namespace vnet {

/// Numerical knobs for the analytic coverage computations.
struct QuadratureConfig {
    double omega_max = 1e8;        // hard upper truncation of the frequency integral
    double rel_tol = 1e-7;         // adaptive / refinement relative tolerance
    double abs_tol = 1e-12;        // adaptive / refinement absolute tolerance
    double poisson_tail_eps = 1e-6; // truncated mass of the cell-load sum
    int rate_grid_points = 64;     // node budget of the rate integral
    int max_expansion_size = 12;   // refuse subset expansion beyond this many interferers

    void validate() const; // throws ValidationError
};

/// Bitmask over base-station indices marking which ones interfere.
using ActiveSet = std::uint32_t;

/// Decision-independent coverage coefficients: for each (serving BS b, SP s)
/// and each subset J of the other BSs, the coefficient of delta_bs * prod_{j
/// in J} x_j in the subset expansion of the network coverage formula.
struct CoverageCoefficients {
    std::size_t bs_count = 0;
    std::size_t sp_count = 0;
    std::vector<double> area_weight;           // per b: pi q_b^2 / A
    std::vector<std::vector<int>> others;      // others[b]: ascending BS indices != b
    // coeff[b][s][subset]: subset bit k corresponds to others[b][k]
    std::vector<std::vector<std::vector<double>>> coeff;

    // Position of BS j among others[b]; -1 when j == b.
    int bit_of(int b, int j) const;
    // Compress a full-width ActiveSet (bits = BS indices, bit b ignored) into
    // the subset index space of serving BS b.
    std::uint32_t compress(int b, ActiveSet active) const;
    // Direct evaluation of the expansion for one SP: sum over leased b of
    // delta[b][sp] * sum over subsets J of leased others of coeff[b][sp][J].
    double evaluate(const Allocation& alloc, int sp) const;
};

/// Density value that can flag a degenerate (Dirac at zero) distribution.
struct Density {
    double value = 0.0;
    bool degenerate = false;
};

/// The analytic engine: interference characteristic functions, Fourier
/// inversion of the interference/SINR distributions, both rate-coverage
/// formulas, and the decision-independent coefficient precomputation.
///
/// Immutable after construction; evaluation results are memoized internally
/// behind a mutex, and repeated queries are deterministic regardless of call
/// order (fixed grids, fixed summation order).
class CoverageEngine {
  public:
    explicit CoverageEngine(const Scenario& scenario, QuadratureConfig cfg = {});
    ~CoverageEngine();
    CoverageEngine(const CoverageEngine&) = delete;
    CoverageEngine& operator=(const CoverageEngine&) = delete;

    const Scenario& scenario() const { return scenario_; }
    const QuadratureConfig& config() const { return cfg_; }

    /// Mean number of UEs of intensity lambda within a disc of radius q.
    static double mean_load(double lambda_per_km2, double q_km);

    /// Characteristic function of the interference from BS j at a UE served
    /// by BS `serving` at distance u, with the interferer angle uniform.
    /// Equals 1 exactly at omega = 0; modulus <= 1 everywhere.
    cdouble interferer_cf(int j, int serving, double u, double omega) const;

    /// Interference density at value c (watts) for a UE at distance u from
    /// the serving BS, aggregated over the active interferers. An empty
    /// active set is a point mass at zero, reported via the degenerate flag.
    Density interference_pdf(double c, double u, int serving, ActiveSet active) const;

    /// Density of the received SINR at threshold t for a UE uniform on the
    /// serving BS's coverage disc.
    double sinr_pdf(double t, int serving, ActiveSet active) const;

    /// P(SINR > t) for the same setup (complementary CDF of sinr_pdf).
    double sinr_ccdf(double t, int serving, ActiveSet active) const;

    /// Probability that the rate of a UE uniform on BS b's coverage disc,
    /// with mean-load time sharing for SP s, exceeds s.min_rate, given the
    /// interferers in `active`. The leading slice fraction is not included.
    double per_bs_coverage(int b, const ServiceDemand& s, ActiveSet active) const;

    /// Circular-approximation network coverage for SP sp under `alloc`:
    /// sum over b of delta[b][sp] * (pi q_b^2/A) * per_bs_coverage(b, sp,
    /// leased \ {b}). Linear in the slice fractions for a fixed lease set.
    double network_coverage(const Allocation& alloc, int sp) const;

    /// Rate-coverage bracket for one Voronoi cell: the probability that a UE
    /// uniform on `cell` served by BS b (all other BSs interfering, cell-load
    /// 1 + Poisson(lambda_s * A_b) truncated to mass 1 - poisson_tail_eps)
    /// exceeds the demand's rate floor, scaled by the cell's area share.
    double voronoi_bs_coverage(int b, const ServiceDemand& demand,
                               const Cell& cell) const;

    /// Voronoi-cell rate coverage for SP sp: the delta-weighted sum of
    /// voronoi_bs_coverage over the cells. Requires every BS leased (the
    /// tessellation covers all of them).
    double voronoi_rate_coverage(const Allocation& alloc, int sp,
                                 const std::vector<Cell>& cells) const;

    /// Decision-independent coefficients of the subset expansion for every
    /// (b, s). Refuses scenarios with more than max_expansion_size
    /// interferers per serving BS.
    CoverageCoefficients precompute_coefficients() const;

    /// Sidecar coefficient cache, keyed by scenario content hash and the
    /// exact config. Returns false when the file is absent or keyed
    /// differently; throws ParseError on a malformed file.
    bool load_coefficients(const std::string& path, CoverageCoefficients& out) const;
    void save_coefficients(const std::string& path, const CoverageCoefficients& c) const;

  private:
    struct State;
    Scenario scenario_;
    QuadratureConfig cfg_;
    std::unique_ptr<State> state_;

    struct BsCtx;
    struct GTable;
    struct VoronoiCtx;
    const BsCtx& bs_ctx(int b) const;
    const GTable& g_table(int b, const ServiceDemand& s) const;
    double f_mask(int b, const ServiceDemand& s, std::uint32_t subset) const;
    const std::vector<cdouble>& subset_product(int b, std::uint32_t subset) const;
    const VoronoiCtx& voronoi_ctx(int b, const Cell& cell) const;
};

} // namespace vnet
