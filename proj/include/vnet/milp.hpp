#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vnet/coverage.hpp"
#include "vnet/scenario.hpp"

namespace vnet {

enum class VarKind { binary, continuous };
enum class Relation { le, eq, ge };

struct Variable {
    std::string name;
    VarKind kind = VarKind::continuous;
    double lower = 0.0;
    double upper = 1.0;
};

struct Constraint {
    std::string name;
    std::vector<std::pair<int, double>> terms; // (variable id, coefficient)
    Relation rel = Relation::le;
    double rhs = 0.0;
};

/// A mixed-integer linear program, always minimizing. Variable ids are
/// indices into `variables`.
struct MILPModel {
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;
    std::vector<std::pair<int, double>> objective;

    int add_variable(const std::string& name, VarKind kind, double lower, double upper);
    // Merges duplicate variable references; throws on unknown ids.
    void add_constraint(const std::string& name, std::vector<std::pair<int, double>> terms,
                        Relation rel, double rhs);
    // Structural invariants: known ids everywhere, binaries bounded by [0,1],
    // finite bounds ordered, unique names.
    void validate() const;
    // CPLEX-style LP text format for debugging and diffing.
    std::string to_lp_format() const;
};

/// Registry of linearized products so each product gets exactly one
/// auxiliary variable. `binary_valued` tracks variables that are provably
/// 0/1 at any integral solution: declared binaries plus product auxiliaries,
/// which is what qualifies a variable as the binary operand of a mixed
/// product.
struct LinearizationMap {
    std::map<std::vector<int>, int> product_aux;       // sorted binary ids -> aux
    std::map<std::pair<int, int>, int> mixed_aux;      // (binary-valued, continuous) -> aux
    std::set<int> binary_valued;
};

/// Auxiliary w = prod_j x_j for >= 2 distinct binaries: w <= x_j for every j
/// and w >= sum_j x_j - (|J|-1), with w in [0,1]. Returns the existing aux
/// when the subset is already registered.
int linearize_binary_product(MILPModel& model, LinearizationMap& lin,
                             std::vector<int> vars);

/// Auxiliary z = bin * cont for a binary-valued `bin` and a continuous
/// `cont` with bounds inside [0,1]: z <= bin, z <= cont, z >= cont - (1 -
/// bin), z >= 0. Exact at every integral solution. Idempotent per pair.
int linearize_mixed_product(MILPModel& model, LinearizationMap& lin, int bin_var,
                            int cont_var);

/// The built leasing-and-slicing MILP together with the bookkeeping needed
/// to interpret a solution vector.
struct Problem1Build {
    MILPModel model;
    LinearizationMap lin;
    std::vector<int> x_var;                  // per BS index: lease binary
    std::vector<std::vector<int>> delta_var; // [b][s]: slice fraction
    std::vector<int> coverage_row;           // per SP: constraint index
    double dropped_mass = 0.0; // summed |coeff| of expansion terms below 1e-12
};

/// Exact MILP reformulation of the minimum-cost leasing problem: minimize
/// sum c_b x_b subject to one linearized coverage constraint per SP
/// (sum over b and interferer subsets J of coeff * delta_bs * prod_{j in J}
/// x_j >= beta_s), per-BS time budgets sum_s delta_bs <= 1, and linking
/// delta_bs <= x_b. Expansion terms with |coeff| < 1e-12 are dropped and
/// accounted in dropped_mass.
Problem1Build build_problem1(const Scenario& scenario, const CoverageCoefficients& coeffs);

/// Reads an integral solution vector back into an Allocation, applying the
/// cleanup rule (a leased BS whose slices are all zero is unleased; its cost
/// was never necessary since costs are nonnegative). Throws ValidationError
/// when an x variable is further than 1e-6 from an integer.
Allocation extract_allocation(const Problem1Build& build, const Scenario& scenario,
                              const std::vector<double>& solution);

} // namespace vnet
