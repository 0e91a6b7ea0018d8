#include "vnet/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "vnet/errors.hpp"

namespace vnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;   // smallest usable pivot element
constexpr double kReducedTol = 1e-9; // optimality tolerance on reduced costs
constexpr double kPhase1Tol = 1e-7;  // residual infeasibility treated as zero
constexpr double kIntTol = 1e-6;     // integrality tolerance on binaries
constexpr double kCostTol = 1e-9;    // pruning / incumbent comparison tolerance

enum : char { kAtLower = 0, kAtUpper = 1, kBasic = 2 };

/// Dense bounded-variable simplex working state. Columns are the model
/// variables, then one slack per row, then any artificials appended by the
/// phase-1 setup. The tableau is kept fully eliminated (basis columns are
/// unit columns); variable values are tracked explicitly so nonbasic
/// variables can rest at either bound.
struct Tableau {
    int m = 0;
    int ncols = 0;
    int stride = 0;
    std::vector<double> T;
    std::vector<double> lo, up, xval;
    std::vector<char> status;
    std::vector<int> basis; // per row

    double* row(int i) { return T.data() + static_cast<std::size_t>(i) * stride; }
    const double* row(int i) const {
        return T.data() + static_cast<std::size_t>(i) * stride;
    }
};

/// One simplex phase: price, ratio-test, pivot until optimal or unbounded.
/// Dantzig pricing switches to Bland's rule after `bland_after` iterations to
/// guarantee termination; the shared iteration counter enforces the overall
/// pivot budget.
enum class PhaseEnd { optimal, unbounded };

PhaseEnd run_simplex(Tableau& t, const std::vector<double>& cost, long& iter,
                     long iter_cap, long bland_after) {
    const int m = t.m;
    const int n = t.ncols;

    // Reduced costs d = c - c_B^T B^{-1} A, computed from the eliminated
    // tableau and then maintained incrementally across pivots.
    std::vector<double> d(cost.begin(), cost.begin() + n);
    for (int i = 0; i < m; ++i) {
        const double cb = cost[t.basis[i]];
        if (cb == 0.0) continue;
        const double* r = t.row(i);
        for (int j = 0; j < n; ++j) d[j] -= cb * r[j];
    }
    for (int i = 0; i < m; ++i) d[t.basis[i]] = 0.0;

    for (;;) {
        if (++iter > iter_cap)
            throw NumericalError("simplex: pivot budget exhausted (" +
                                 std::to_string(iter_cap) + " iterations)");
        const bool bland = iter > bland_after;

        // Entering column.
        int enter = -1;
        double best_score = kReducedTol;
        for (int j = 0; j < n; ++j) {
            if (t.status[j] == kBasic) continue;
            if (t.lo[j] == t.up[j]) continue; // fixed, never enters
            const double dj = d[j];
            double score = 0.0;
            if (t.status[j] == kAtLower && dj < -kReducedTol) score = -dj;
            else if (t.status[j] == kAtUpper && dj > kReducedTol) score = dj;
            else continue;
            if (bland) { enter = j; break; }
            if (score > best_score) { best_score = score; enter = j; }
        }
        if (enter < 0) return PhaseEnd::optimal;

        const double dir = t.status[enter] == kAtLower ? 1.0 : -1.0;

        // Ratio test: the entering variable moves by tstep >= 0 from its
        // bound; basic variables move by -dir * T[i][enter] per unit.
        double tstep = t.up[enter] - t.lo[enter]; // bound-to-bound flip
        int leave_row = -1;
        double leave_coef = 0.0;
        for (int i = 0; i < m; ++i) {
            const double a = t.row(i)[enter];
            if (std::fabs(a) <= kPivotTol) continue;
            const double delta = -dir * a;
            const int bc = t.basis[i];
            double lim;
            if (delta > 0.0) {
                if (t.up[bc] == kInf) continue;
                lim = (t.up[bc] - t.xval[bc]) / delta;
            } else {
                lim = (t.xval[bc] - t.lo[bc]) / (-delta);
            }
            if (lim < 0.0) lim = 0.0;
            if (lim < tstep - 1e-12) {
                tstep = lim;
                leave_row = i;
                leave_coef = a;
            } else if (leave_row >= 0 && lim <= tstep + 1e-12) {
                // Tie-break: Bland needs the smallest basic index; Dantzig
                // phases prefer the numerically largest pivot.
                if (bland ? t.basis[i] < t.basis[leave_row]
                          : std::fabs(a) > std::fabs(leave_coef)) {
                    leave_row = i;
                    leave_coef = a;
                }
            }
        }

        if (leave_row < 0) {
            if (tstep == kInf) return PhaseEnd::unbounded;
            // Bound flip: no basis change.
            const double step = tstep;
            for (int i = 0; i < m; ++i) {
                const double a = t.row(i)[enter];
                if (a != 0.0) t.xval[t.basis[i]] -= dir * a * step;
            }
            t.xval[enter] = dir > 0.0 ? t.up[enter] : t.lo[enter];
            t.status[enter] = dir > 0.0 ? kAtUpper : kAtLower;
            continue;
        }

        // Pivot at (leave_row, enter).
        const double step = tstep;
        for (int i = 0; i < m; ++i) {
            if (i == leave_row) continue;
            const double a = t.row(i)[enter];
            if (a != 0.0) t.xval[t.basis[i]] -= dir * a * step;
        }
        const int leaving = t.basis[leave_row];
        const double delta_leave = -dir * leave_coef;
        t.xval[leaving] = delta_leave > 0.0 ? t.up[leaving] : t.lo[leaving];
        t.status[leaving] = delta_leave > 0.0 ? kAtUpper : kAtLower;
        t.xval[enter] += dir * step; // from its current bound value
        t.status[enter] = kBasic;
        t.basis[leave_row] = enter;

        double* pr = t.row(leave_row);
        const double piv = pr[enter];
        const double inv = 1.0 / piv;
        for (int j = 0; j < n; ++j) pr[j] *= inv;
        pr[enter] = 1.0;
        for (int i = 0; i < m; ++i) {
            if (i == leave_row) continue;
            double* ri = t.row(i);
            const double f = ri[enter];
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) ri[j] -= f * pr[j];
            ri[enter] = 0.0;
        }
        const double fd = d[enter];
        if (fd != 0.0) {
            for (int j = 0; j < n; ++j) d[j] -= fd * pr[j];
            d[enter] = 0.0;
        }
    }
}

/// Degenerate pivot used to drive a variable out of the basis at unchanged
/// values (step 0). Returns false when no acceptable pivot element exists.
bool pivot_out(Tableau& t, int row, int max_col) {
    double* pr = t.row(row);
    int enter = -1;
    double best = kPivotTol;
    for (int j = 0; j < max_col; ++j) {
        if (t.status[j] == kBasic || t.lo[j] == t.up[j]) continue;
        if (std::fabs(pr[j]) > best) { best = std::fabs(pr[j]); enter = j; }
    }
    if (enter < 0) return false;
    const int leaving = t.basis[row];
    t.status[leaving] = kAtLower;
    t.xval[leaving] = t.lo[leaving];
    t.status[enter] = kBasic;
    t.basis[row] = enter;
    const double inv = 1.0 / pr[enter];
    for (int j = 0; j < t.ncols; ++j) pr[j] *= inv;
    pr[enter] = 1.0;
    for (int i = 0; i < t.m; ++i) {
        if (i == row) continue;
        double* ri = t.row(i);
        const double f = ri[enter];
        if (f == 0.0) continue;
        for (int j = 0; j < t.ncols; ++j) ri[j] -= f * pr[j];
        ri[enter] = 0.0;
    }
    return true;
}

/// Core LP solve over explicit bound vectors (the model's own bounds are
/// passed by solve_lp; branch-and-bound passes tightened copies).
LPSolution lp_solve_core(const MILPModel& model, const std::vector<double>& lo_in,
                         const std::vector<double>& up_in) {
    const int nvar = static_cast<int>(model.variables.size());
    const int m = static_cast<int>(model.constraints.size());
    for (int j = 0; j < nvar; ++j) {
        if (!(lo_in[j] <= up_in[j]))
            return LPSolution{LPStatus::infeasible, {}, 0.0};
        if (!std::isfinite(lo_in[j]))
            throw ValidationError("solve_lp: lower bounds must be finite");
    }

    Tableau t;
    t.m = m;
    t.stride = nvar + 2 * m; // room for slacks + worst-case artificials
    t.ncols = nvar + m;
    t.T.assign(static_cast<std::size_t>(std::max(m, 1)) * t.stride, 0.0);
    t.lo.assign(t.stride, 0.0);
    t.up.assign(t.stride, kInf);
    t.xval.assign(t.stride, 0.0);
    t.status.assign(t.stride, kAtLower);
    t.basis.assign(m, -1);

    for (int j = 0; j < nvar; ++j) {
        t.lo[j] = lo_in[j];
        t.up[j] = up_in[j];
        t.xval[j] = lo_in[j];
        t.status[j] = kAtLower;
    }

    // Rows: sum a_ij x_j + sigma * slack = rhs. Slack bounds encode the
    // relation; equality rows get a slack fixed at zero.
    int n_art = 0;
    for (int i = 0; i < m; ++i) {
        const Constraint& c = model.constraints[i];
        double* r = t.row(i);
        double lhs = 0.0;
        for (const auto& [id, coef] : c.terms) {
            r[id] = coef;
            lhs += coef * t.xval[id];
        }
        const int slack = nvar + i;
        double sigma;
        switch (c.rel) {
            case Relation::le: sigma = 1.0; break;
            case Relation::ge: sigma = -1.0; break;
            default: sigma = 1.0; t.up[slack] = 0.0; break; // eq: fixed slack
        }
        r[slack] = sigma;
        const double resid = c.rhs - lhs;
        const double sval = sigma * resid; // candidate basic slack value
        const bool slack_ok = sval >= 0.0 && sval <= t.up[slack];
        if (slack_ok) {
            t.basis[i] = slack;
            t.status[slack] = kBasic;
            t.xval[slack] = sval;
            if (sigma < 0.0)
                for (int j = 0; j < t.ncols + n_art; ++j) r[j] = -r[j];
        } else {
            const int art = t.ncols + n_art; // appended after all slacks
            ++n_art;
            const double tau = resid >= 0.0 ? 1.0 : -1.0;
            r[art] = tau;
            t.lo[art] = 0.0;
            t.up[art] = kInf;
            t.basis[i] = art;
            t.status[art] = kBasic;
            t.xval[art] = std::fabs(resid);
            if (tau < 0.0)
                for (int j = 0; j < art; ++j) r[j] = -r[j];
            r[art] = 1.0;
        }
    }
    const int first_art = t.ncols;
    t.ncols += n_art;

    long iter = 0;
    const long iter_cap = 2000 + 100L * (m + t.ncols);
    const long bland_after = 500 + 4L * (m + t.ncols);

    if (n_art > 0) {
        std::vector<double> c1(t.ncols, 0.0);
        for (int j = first_art; j < t.ncols; ++j) c1[j] = 1.0;
        const PhaseEnd end = run_simplex(t, c1, iter, iter_cap, bland_after);
        if (end == PhaseEnd::unbounded)
            throw NumericalError("simplex: phase-1 problem reported unbounded");
        double infeas = 0.0;
        for (int j = first_art; j < t.ncols; ++j) infeas += t.xval[j];
        if (infeas > kPhase1Tol) return LPSolution{LPStatus::infeasible, {}, 0.0};
        // Pin artificials at zero and try to remove any still basic.
        for (int j = first_art; j < t.ncols; ++j) {
            t.lo[j] = t.up[j] = 0.0;
            if (t.status[j] != kBasic) t.xval[j] = 0.0;
        }
        for (int i = 0; i < m; ++i)
            if (t.basis[i] >= first_art) {
                t.xval[t.basis[i]] = 0.0;
                pivot_out(t, i, first_art); // a redundant row keeps its pinned artificial
            }
    }

    std::vector<double> c2(t.ncols, 0.0);
    for (const auto& [id, coef] : model.objective) c2[id] += coef;
    const PhaseEnd end = run_simplex(t, c2, iter, iter_cap, bland_after);
    if (end == PhaseEnd::unbounded) return LPSolution{LPStatus::unbounded, {}, 0.0};

    LPSolution out;
    out.status = LPStatus::optimal;
    out.values.assign(t.xval.begin(), t.xval.begin() + nvar);
    for (int j = 0; j < nvar; ++j) {
        // Snap residual simplex noise onto the box.
        out.values[j] = std::min(std::max(out.values[j], lo_in[j]), up_in[j]);
    }
    out.objective = 0.0;
    for (const auto& [id, coef] : model.objective) out.objective += coef * out.values[id];

    // Defensive feasibility audit; a violation here means the tableau lost
    // too much precision to trust the answer.
    for (const auto& c : model.constraints) {
        double lhs = 0.0;
        double scale = 1.0;
        for (const auto& [id, coef] : c.terms) {
            lhs += coef * out.values[id];
            scale = std::max(scale, std::fabs(coef));
        }
        const double slackv = lhs - c.rhs;
        const double tol = 1e-7 * scale;
        const bool ok = (c.rel == Relation::le && slackv <= tol) ||
                        (c.rel == Relation::ge && slackv >= -tol) ||
                        (c.rel == Relation::eq && std::fabs(slackv) <= tol);
        if (!ok)
            throw NumericalError("simplex: solution failed the feasibility audit on " +
                                 c.name);
    }
    return out;
}

void log_node(std::ostream* log, std::uint64_t node, int depth, double bound,
              double incumbent, const char* action) {
    if (!log) return;
    char buf[160];
    if (incumbent == kInf)
        std::snprintf(buf, sizeof(buf), "node %llu depth %d bound %.9g incumbent inf %s\n",
                      static_cast<unsigned long long>(node), depth, bound, action);
    else
        std::snprintf(buf, sizeof(buf), "node %llu depth %d bound %.9g incumbent %.9g %s\n",
                      static_cast<unsigned long long>(node), depth, bound, incumbent,
                      action);
    (*log) << buf;
}

/// Slice LP over an explicit lease set: minimize total allocated fraction
/// subject to the per-SP coverage floors and per-BS time budgets, with
/// cov[i][s] the rate-coverage coefficient of leased BS i toward SP s.
struct DeltaLP {
    MILPModel model;
    std::vector<std::vector<int>> dvar; // [leased index][s]
};

DeltaLP make_delta_lp(const Scenario& scenario, const std::vector<int>& lease,
                      const std::vector<std::vector<double>>& cov) {
    const std::size_t S = scenario.demands.size();
    DeltaLP out;
    out.dvar.assign(lease.size(), std::vector<int>(S, -1));
    for (std::size_t i = 0; i < lease.size(); ++i)
        for (std::size_t s = 0; s < S; ++s) {
            out.dvar[i][s] = out.model.add_variable(
                "d" + std::to_string(scenario.base_stations[lease[i]].id) + "_" +
                    std::to_string(scenario.demands[s].sp_id),
                VarKind::continuous, 0.0, 1.0);
            out.model.objective.emplace_back(out.dvar[i][s], 1.0);
        }
    for (std::size_t s = 0; s < S; ++s) {
        std::vector<std::pair<int, double>> terms;
        for (std::size_t i = 0; i < lease.size(); ++i)
            terms.emplace_back(out.dvar[i][s], cov[i][s]);
        out.model.add_constraint("cover_s" + std::to_string(scenario.demands[s].sp_id),
                                 std::move(terms), Relation::ge,
                                 scenario.demands[s].min_coverage_prob);
    }
    for (std::size_t i = 0; i < lease.size(); ++i) {
        std::vector<std::pair<int, double>> terms;
        for (std::size_t s = 0; s < S; ++s) terms.emplace_back(out.dvar[i][s], 1.0);
        out.model.add_constraint(
            "time_b" + std::to_string(scenario.base_stations[lease[i]].id),
            std::move(terms), Relation::le, 1.0);
    }
    return out;
}

/// Rate-coverage coefficient of BS b toward SP s when `leased` marks the
/// interfering lease set: area weight times the conditional coverage.
double coverage_coef(const CoverageEngine& engine, int b, std::size_t s,
                     ActiveSet leased) {
    const Scenario& sc = engine.scenario();
    const double q = sc.base_stations[b].coverage_radius_km;
    const double w = M_PI * q * q / sc.region.area();
    return w * engine.per_bs_coverage(b, sc.demands[s],
                                      leased & ~(ActiveSet{1} << b));
}

/// Builds the allocation for a concrete lease set from its slice LP
/// solution, applying the zero-slice cleanup rule. Returns false when the
/// set cannot meet every coverage floor.
bool allocation_for_set(const CoverageEngine& engine, const std::vector<int>& lease,
                        Allocation& out) {
    const Scenario& sc = engine.scenario();
    const std::size_t S = sc.demands.size();
    ActiveSet mask = 0;
    for (int b : lease) mask |= ActiveSet{1} << b;
    std::vector<std::vector<double>> cov(lease.size(), std::vector<double>(S, 0.0));
    for (std::size_t i = 0; i < lease.size(); ++i)
        for (std::size_t s = 0; s < S; ++s)
            cov[i][s] = coverage_coef(engine, lease[i], s, mask);
    if (lease.empty()) {
        for (const auto& d : sc.demands)
            if (d.min_coverage_prob > 0.0) return false;
        out = Allocation::empty(sc);
        return true;
    }
    DeltaLP lp = make_delta_lp(sc, lease, cov);
    std::vector<double> lo(lp.model.variables.size()), up(lp.model.variables.size());
    for (std::size_t j = 0; j < lp.model.variables.size(); ++j) {
        lo[j] = lp.model.variables[j].lower;
        up[j] = lp.model.variables[j].upper;
    }
    const LPSolution sol = lp_solve_core(lp.model, lo, up);
    if (sol.status != LPStatus::optimal) return false;
    out = Allocation::empty(sc);
    for (std::size_t i = 0; i < lease.size(); ++i) {
        const int b = lease[i];
        out.leased[b] = 1;
        double total = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double d = std::min(1.0, std::max(0.0, sol.values[lp.dvar[i][s]]));
            out.delta[b][s] = d;
            total += d;
        }
        if (total > 1.0)
            for (std::size_t s = 0; s < S; ++s) out.delta[b][s] /= total;
        if (total <= 1e-9) {
            out.leased[b] = 0;
            for (std::size_t s = 0; s < S; ++s) out.delta[b][s] = 0.0;
        }
    }
    validate_allocation(out, sc);
    return true;
}

bool lex_less(const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::vector<int> mask_to_list(ActiveSet mask, int B) {
    std::vector<int> out;
    for (int b = 0; b < B; ++b)
        if (mask & (ActiveSet{1} << b)) out.push_back(b);
    return out;
}

/// Direct branch-and-bound on the lease set for scenarios too large to
/// linearize: each node relaxes the undecided BSs to fractional leases that
/// do not interfere, which can only overstate achievable coverage, so the
/// node LP is a valid lower bound on every completion's cost.
BnBResult solve_direct(const CoverageEngine& engine, const BnBOptions& opts) {
    const Scenario& sc = engine.scenario();
    const int B = static_cast<int>(sc.base_stations.size());
    const std::size_t S = sc.demands.size();
    if (B > 31)
        throw ValidationError("solve_exact: more than 31 base stations is unsupported");

    struct Node {
        ActiveSet fixed1 = 0, fixed0 = 0;
        double bound = -kInf;
        int depth = 0;
    };
    std::vector<Node> open{Node{}};
    double best_cost = kInf;
    Allocation incumbent = Allocation::empty(sc);
    bool have_incumbent = false;
    std::uint64_t explored = 0;

    while (!open.empty()) {
        Node node = open.back();
        open.pop_back();
        if (node.bound >= best_cost - kCostTol) continue;
        if (++explored > opts.node_budget)
            throw NumericalError("branch-and-bound: node budget exceeded");
        if (explored % 10000 == 0)
            std::stable_sort(open.begin(), open.end(),
                             [](const Node& a, const Node& b) { return a.bound > b.bound; });

        // Node LP: undecided BSs lease fractionally at optimistic coverage.
        std::vector<int> undecided, present;
        double fixed_cost = 0.0;
        for (int b = 0; b < B; ++b) {
            const ActiveSet bit = ActiveSet{1} << b;
            if (node.fixed0 & bit) continue;
            present.push_back(b);
            if (node.fixed1 & bit) fixed_cost += sc.base_stations[b].lease_cost;
            else undecided.push_back(b);
        }

        MILPModel lp;
        std::vector<int> yvar(B, -1), dvar_flat(B * S, -1);
        for (int b : undecided) {
            yvar[b] = lp.add_variable("y" + std::to_string(sc.base_stations[b].id),
                                      VarKind::continuous, 0.0, 1.0);
            lp.objective.emplace_back(yvar[b], sc.base_stations[b].lease_cost);
        }
        for (int b : present)
            for (std::size_t s = 0; s < S; ++s)
                dvar_flat[b * S + s] = lp.add_variable(
                    "d" + std::to_string(sc.base_stations[b].id) + "_" +
                        std::to_string(sc.demands[s].sp_id),
                    VarKind::continuous, 0.0, 1.0);
        for (std::size_t s = 0; s < S; ++s) {
            std::vector<std::pair<int, double>> terms;
            for (int b : present)
                terms.emplace_back(dvar_flat[b * S + s],
                                   coverage_coef(engine, b, s, node.fixed1));
            lp.add_constraint("cover_s" + std::to_string(sc.demands[s].sp_id),
                              std::move(terms), Relation::ge,
                              sc.demands[s].min_coverage_prob);
        }
        for (int b : present) {
            std::vector<std::pair<int, double>> terms;
            for (std::size_t s = 0; s < S; ++s)
                terms.emplace_back(dvar_flat[b * S + s], 1.0);
            if (yvar[b] >= 0) terms.emplace_back(yvar[b], -1.0);
            lp.add_constraint("time_b" + std::to_string(sc.base_stations[b].id),
                              std::move(terms), Relation::le, yvar[b] >= 0 ? 0.0 : 1.0);
        }
        std::vector<double> lo(lp.variables.size()), up(lp.variables.size());
        for (std::size_t j = 0; j < lp.variables.size(); ++j) {
            lo[j] = lp.variables[j].lower;
            up[j] = lp.variables[j].upper;
        }
        const LPSolution sol = lp_solve_core(lp, lo, up);
        if (sol.status != LPStatus::optimal) {
            log_node(opts.log, explored, node.depth, kInf,
                     have_incumbent ? best_cost : kInf, "infeasible");
            continue;
        }
        const double bound = fixed_cost + sol.objective;
        if (bound >= best_cost - kCostTol) {
            log_node(opts.log, explored, node.depth, bound,
                     have_incumbent ? best_cost : kInf, "pruned");
            continue;
        }

        // Fractionality of the undecided lease relaxation. Most-fractional
        // wins; ties go to the larger lease cost, then the lower index.
        int branch_b = -1;
        double branch_score = 0.0;
        bool integral = true;
        for (int b : undecided) {
            const double v = sol.values[yvar[b]];
            if (std::fabs(v - std::round(v)) <= kIntTol) continue;
            integral = false;
            const double score = 0.5 - std::fabs(v - 0.5);
            bool take = branch_b < 0 || score > branch_score + 1e-12;
            if (!take && score > branch_score - 1e-12 &&
                sc.base_stations[b].lease_cost > sc.base_stations[branch_b].lease_cost)
                take = true;
            if (take) {
                branch_score = score;
                branch_b = b;
            }
        }

        if (integral) {
            // A rounded lease set is only a candidate: its optimistic
            // coverage must be re-checked against the true coefficients.
            std::vector<int> lease;
            for (int b : present) {
                if (node.fixed1 & (ActiveSet{1} << b)) lease.push_back(b);
                else if (sol.values[yvar[b]] > 0.5) lease.push_back(b);
            }
            Allocation cand = Allocation::empty(sc);
            if (allocation_for_set(engine, lease, cand)) {
                const double cost = cand.lease_cost(sc);
                if (cost < best_cost - kCostTol) {
                    best_cost = cost;
                    incumbent = cand;
                    have_incumbent = true;
                    log_node(opts.log, explored, node.depth, bound, best_cost,
                             "incumbent");
                }
            }
            if (undecided.empty() || bound >= best_cost - kCostTol) continue;
            // The relaxation was optimistic; keep splitting. Branch where the
            // most cost is at stake.
            branch_b = undecided.front();
            for (int b : undecided)
                if (sc.base_stations[b].lease_cost >
                    sc.base_stations[branch_b].lease_cost)
                    branch_b = b;
        }
        log_node(opts.log, explored, node.depth, bound,
                 have_incumbent ? best_cost : kInf, "branch");

        const ActiveSet bit = ActiveSet{1} << branch_b;
        open.push_back(Node{node.fixed1, node.fixed0 | bit, bound, node.depth + 1});
        open.push_back(Node{node.fixed1 | bit, node.fixed0, bound, node.depth + 1});
    }

    BnBResult out;
    out.nodes = explored;
    if (have_incumbent) {
        out.status = BnBStatus::optimal;
        out.allocation = incumbent;
        out.cost = best_cost;
        out.gap = 0.0;
    } else {
        out.status = BnBStatus::infeasible;
        out.allocation = Allocation::empty(sc);
    }
    return out;
}

} // namespace

LPSolution solve_lp(const MILPModel& model) {
    model.validate();
    std::vector<double> lo(model.variables.size()), up(model.variables.size());
    for (std::size_t j = 0; j < model.variables.size(); ++j) {
        lo[j] = model.variables[j].lower;
        up[j] = model.variables[j].upper;
    }
    return lp_solve_core(model, lo, up);
}

BnBResult branch_and_bound(const Problem1Build& build, const Scenario& scenario,
                           const BnBOptions& opts) {
    const MILPModel& model = build.model;
    model.validate();
    std::vector<double> lo0(model.variables.size()), up0(model.variables.size());
    for (std::size_t j = 0; j < model.variables.size(); ++j) {
        lo0[j] = model.variables[j].lower;
        up0[j] = model.variables[j].upper;
    }
    std::vector<int> binaries;
    for (std::size_t j = 0; j < model.variables.size(); ++j)
        if (model.variables[j].kind == VarKind::binary)
            binaries.push_back(static_cast<int>(j));
    std::vector<double> obj_coef(model.variables.size(), 0.0);
    for (const auto& [id, coef] : model.objective) obj_coef[id] += coef;

    struct Node {
        std::vector<std::pair<int, char>> fixes;
        double bound = -kInf;
        int depth = 0;
    };
    std::vector<Node> open{Node{}};
    double best_cost = kInf;
    Allocation incumbent = Allocation::empty(scenario);
    bool have_incumbent = false;
    std::uint64_t explored = 0;

    while (!open.empty()) {
        Node node = std::move(open.back());
        open.pop_back();
        if (node.bound >= best_cost - kCostTol) continue;
        if (++explored > opts.node_budget)
            throw NumericalError("branch-and-bound: node budget exceeded");
        if (explored % 10000 == 0)
            std::stable_sort(open.begin(), open.end(),
                             [](const Node& a, const Node& b) { return a.bound > b.bound; });

        std::vector<double> lo = lo0, up = up0;
        for (const auto& [var, val] : node.fixes) {
            lo[var] = val;
            up[var] = val;
        }
        const LPSolution sol = lp_solve_core(model, lo, up);
        if (sol.status == LPStatus::unbounded)
            throw NumericalError("branch-and-bound: relaxation reported unbounded");
        if (sol.status != LPStatus::optimal) {
            log_node(opts.log, explored, node.depth, kInf,
                     have_incumbent ? best_cost : kInf, "infeasible");
            continue;
        }
        if (sol.objective >= best_cost - kCostTol) {
            log_node(opts.log, explored, node.depth, sol.objective,
                     have_incumbent ? best_cost : kInf, "pruned");
            continue;
        }

        // Most-fractional branching; ties by larger objective coefficient,
        // then lower variable index.
        int branch = -1;
        double branch_score = 0.0;
        double branch_cost = -kInf;
        for (int j : binaries) {
            const double v = sol.values[j];
            if (std::fabs(v - std::round(v)) <= kIntTol) continue;
            const double score = 0.5 - std::fabs(v - 0.5);
            bool take = branch < 0 || score > branch_score + 1e-12;
            if (!take && score > branch_score - 1e-12 && obj_coef[j] > branch_cost)
                take = true;
            if (take) {
                branch = j;
                branch_score = score;
                branch_cost = obj_coef[j];
            }
        }

        if (branch < 0) {
            Allocation cand = extract_allocation(build, scenario, sol.values);
            const double cost = cand.lease_cost(scenario);
            if (cost < best_cost - kCostTol) {
                best_cost = cost;
                incumbent = std::move(cand);
                have_incumbent = true;
            }
            log_node(opts.log, explored, node.depth, sol.objective, best_cost,
                     "integral");
            continue;
        }
        log_node(opts.log, explored, node.depth, sol.objective,
                 have_incumbent ? best_cost : kInf, "branch");

        Node zero{node.fixes, sol.objective, node.depth + 1};
        zero.fixes.emplace_back(branch, char{0});
        Node one{std::move(node.fixes), sol.objective, node.depth + 1};
        one.fixes.emplace_back(branch, char{1});
        open.push_back(std::move(zero));
        open.push_back(std::move(one)); // lease-first dive
    }

    BnBResult out;
    out.nodes = explored;
    if (have_incumbent) {
        out.status = BnBStatus::optimal;
        out.allocation = incumbent;
        out.cost = best_cost;
        out.gap = 0.0;
    } else {
        out.status = BnBStatus::infeasible;
        out.allocation = Allocation::empty(scenario);
    }
    return out;
}

BnBResult solve_exact(const CoverageEngine& engine, const CoverageCoefficients* coeffs,
                      const BnBOptions& opts) {
    const Scenario& sc = engine.scenario();
    const int B = static_cast<int>(sc.base_stations.size());
    const bool milp_ok = B <= opts.milp_bs_limit &&
                         B - 1 <= engine.config().max_expansion_size;
    if (milp_ok) {
        Problem1Build build = coeffs ? build_problem1(sc, *coeffs)
                                     : build_problem1(sc, engine.precompute_coefficients());
        return branch_and_bound(build, sc, opts);
    }
    return solve_direct(engine, opts);
}

BnBResult solve_exact(const CoverageEngine& engine, const BnBOptions& opts) {
    return solve_exact(engine, nullptr, opts);
}

BnBResult enumerate_oracle(const CoverageEngine& engine, const BnBOptions& opts) {
    const Scenario& sc = engine.scenario();
    const int B = static_cast<int>(sc.base_stations.size());
    if (B > 20)
        throw ValidationError("enumerate_oracle: refusing more than 20 base stations");

    double best_cost = kInf;
    bool have_best = false;
    std::vector<int> best_lease;
    Allocation best_alloc = Allocation::empty(sc);
    std::uint64_t evaluated = 0;

    for (ActiveSet mask = 0; mask < (ActiveSet{1} << B); ++mask) {
        std::vector<int> lease = mask_to_list(mask, B);
        double cost = 0.0;
        for (int b : lease) cost += sc.base_stations[b].lease_cost;
        if (have_best) {
            const bool cheaper = cost < best_cost - kCostTol;
            const bool tie = std::fabs(cost - best_cost) <= kCostTol;
            if (!cheaper && !(tie && lex_less(lease, best_lease))) continue;
        }
        Allocation cand = Allocation::empty(sc);
        ++evaluated;
        if (!allocation_for_set(engine, lease, cand)) continue;
        // The zero-slice cleanup may have shrunk the set; tie-breaks compare
        // the set actually leased.
        std::vector<int> cleaned;
        for (int b = 0; b < B; ++b)
            if (cand.leased[b]) cleaned.push_back(b);
        best_cost = cand.lease_cost(sc);
        best_lease = std::move(cleaned);
        best_alloc = std::move(cand);
        have_best = true;
    }

    BnBResult out;
    out.nodes = evaluated;
    if (have_best) {
        out.status = BnBStatus::optimal;
        out.allocation = best_alloc;
        out.cost = best_cost;
        out.gap = 0.0;
    } else {
        out.status = BnBStatus::infeasible;
        out.allocation = Allocation::empty(sc);
    }
    return out;
}

BnBResult enumerate_oracle(const Scenario& scenario, const QuadratureConfig& cfg,
                           const BnBOptions& opts) {
    CoverageEngine engine(scenario, cfg);
    return enumerate_oracle(engine, opts);
}

} // namespace vnet
