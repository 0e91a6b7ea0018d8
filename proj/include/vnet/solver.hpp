#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "vnet/coverage.hpp"
#include "vnet/milp.hpp"
#include "vnet/scenario.hpp"

namespace vnet {

enum class LPStatus { optimal, infeasible, unbounded };

struct LPSolution {
    LPStatus status = LPStatus::infeasible;
    std::vector<double> values; // one per model variable; meaningful when optimal
    double objective = 0.0;
};

/// Linear-programming relaxation solve (integrality dropped, bounds kept):
/// bounded-variable two-phase primal simplex on a dense tableau, Dantzig
/// pricing with a Bland's-rule fallback for termination. Deterministic.
/// Throws NumericalError when the pivot budget is exhausted.
LPSolution solve_lp(const MILPModel& model);

struct BnBOptions {
    std::uint64_t node_budget = 500000; // LP-evaluated nodes before giving up
    // Largest |B| solved through the linearized MILP; beyond it (or when the
    // subset expansion would overflow the engine's guard) the exact search
    // branches directly on the lease variables with an interference-monotone
    // bound instead.
    int milp_bs_limit = 8;
    std::ostream* log = nullptr; // one line per node: bound, incumbent, depth
};

enum class BnBStatus { optimal, infeasible };

struct BnBResult {
    BnBStatus status = BnBStatus::infeasible;
    Allocation allocation; // meaningful when optimal
    double cost = 0.0;
    std::uint64_t nodes = 0;
    double gap = 0.0; // proven optimality gap; 0 when optimal
};

/// Proven-optimal solve of the linearized leasing MILP. Depth-first on the
/// most-fractional lease variable (ties: larger lease cost, then lower
/// index), diving on lease-first, with best-bound reordering every 10^4
/// nodes. Integrality tolerance 1e-6; pruning tolerance 1e-9 on costs.
/// Throws NumericalError when the node budget is exceeded (distinct from a
/// proven-infeasible result).
BnBResult branch_and_bound(const Problem1Build& build, const Scenario& scenario,
                           const BnBOptions& opts = {});

/// Exact minimum-cost leasing solve. Small instances go through
/// build_problem1 + branch_and_bound; larger ones branch directly on the
/// lease set, bounding each node by the LP in which undecided BSs neither
/// pay cost fully nor interfere (optimistic coverage, valid by interference
/// monotonicity). `coeffs` may be null; it is only consulted on the MILP
/// path and computed on demand otherwise.
BnBResult solve_exact(const CoverageEngine& engine, const CoverageCoefficients* coeffs,
                      const BnBOptions& opts = {});
BnBResult solve_exact(const CoverageEngine& engine, const BnBOptions& opts = {});

/// Brute-force optimality oracle: every lease subset (|B| <= 20), cheapest
/// one whose slice LP meets every coverage floor, ties broken toward the
/// lexicographically smallest subset of BS indices. Independent of the
/// branch-and-bound code path by construction.
BnBResult enumerate_oracle(const CoverageEngine& engine, const BnBOptions& opts = {});
BnBResult enumerate_oracle(const Scenario& scenario, const QuadratureConfig& cfg = {},
                           const BnBOptions& opts = {});

} // namespace vnet
