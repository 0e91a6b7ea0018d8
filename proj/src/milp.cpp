#include "vnet/milp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

#include "vnet/errors.hpp"

namespace vnet {

namespace {

constexpr double kCoeffDropTol = 1e-12;

std::string format_coeff(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

int MILPModel::add_variable(const std::string& name, VarKind kind, double lower,
                            double upper) {
    if (name.empty()) throw ValidationError("milp: variable name must be non-empty");
    if (!(lower <= upper))
        throw ValidationError("milp: variable " + name + " has lower > upper");
    if (!std::isfinite(lower))
        throw ValidationError("milp: variable " + name + " needs a finite lower bound");
    if (kind == VarKind::binary && (lower < 0.0 || upper > 1.0))
        throw ValidationError("milp: binary variable " + name + " must live in [0,1]");
    variables.push_back(Variable{name, kind, lower, upper});
    return static_cast<int>(variables.size()) - 1;
}

void MILPModel::add_constraint(const std::string& name,
                               std::vector<std::pair<int, double>> terms, Relation rel,
                               double rhs) {
    std::map<int, double> merged;
    for (const auto& [id, c] : terms) {
        if (id < 0 || id >= static_cast<int>(variables.size()))
            throw ValidationError("milp: constraint " + name +
                                  " references unknown variable id " + std::to_string(id));
        if (!std::isfinite(c))
            throw ValidationError("milp: constraint " + name + " has a non-finite coefficient");
        merged[id] += c;
    }
    Constraint row;
    row.name = name;
    row.rel = rel;
    row.rhs = rhs;
    for (const auto& [id, c] : merged)
        if (c != 0.0) row.terms.emplace_back(id, c);
    constraints.push_back(std::move(row));
}

void MILPModel::validate() const {
    std::set<std::string> names;
    for (const auto& v : variables) {
        if (!names.insert(v.name).second)
            throw ValidationError("milp: duplicate variable name " + v.name);
        if (!(v.lower <= v.upper))
            throw ValidationError("milp: variable " + v.name + " has lower > upper");
        if (!std::isfinite(v.lower))
            throw ValidationError("milp: variable " + v.name + " needs a finite lower bound");
        if (v.kind == VarKind::binary && (v.lower < 0.0 || v.upper > 1.0))
            throw ValidationError("milp: binary variable " + v.name + " must live in [0,1]");
    }
    const int n = static_cast<int>(variables.size());
    for (const auto& c : constraints) {
        for (const auto& [id, coef] : c.terms) {
            if (id < 0 || id >= n)
                throw ValidationError("milp: constraint " + c.name +
                                      " references unknown variable id " + std::to_string(id));
            if (!std::isfinite(coef))
                throw ValidationError("milp: constraint " + c.name +
                                      " has a non-finite coefficient");
        }
        if (!std::isfinite(c.rhs))
            throw ValidationError("milp: constraint " + c.name + " has a non-finite rhs");
    }
    for (const auto& [id, coef] : objective) {
        if (id < 0 || id >= n)
            throw ValidationError("milp: objective references unknown variable id " +
                                  std::to_string(id));
        if (!std::isfinite(coef))
            throw ValidationError("milp: objective has a non-finite coefficient");
    }
}

std::string MILPModel::to_lp_format() const {
    std::ostringstream out;
    auto write_terms = [&](const std::vector<std::pair<int, double>>& terms) {
        if (terms.empty()) {
            out << " 0";
            return;
        }
        bool first = true;
        for (const auto& [id, c] : terms) {
            const double mag = std::fabs(c);
            if (first) {
                out << ' ' << (c < 0.0 ? "- " : "") << format_coeff(mag);
                first = false;
            } else {
                out << (c < 0.0 ? " - " : " + ") << format_coeff(mag);
            }
            out << ' ' << variables[id].name;
        }
    };

    out << "Minimize\n obj:";
    write_terms(objective);
    out << "\nSubject To\n";
    for (const auto& c : constraints) {
        out << ' ' << c.name << ':';
        write_terms(c.terms);
        switch (c.rel) {
            case Relation::le: out << " <= "; break;
            case Relation::eq: out << " = "; break;
            case Relation::ge: out << " >= "; break;
        }
        out << format_coeff(c.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const auto& v : variables) {
        if (v.kind == VarKind::binary) continue;
        if (v.lower == v.upper) {
            out << ' ' << v.name << " = " << format_coeff(v.lower) << '\n';
        } else if (std::isinf(v.upper)) {
            out << ' ' << format_coeff(v.lower) << " <= " << v.name << '\n';
        } else {
            out << ' ' << format_coeff(v.lower) << " <= " << v.name << " <= "
                << format_coeff(v.upper) << '\n';
        }
    }
    bool any_binary = false;
    for (const auto& v : variables)
        if (v.kind == VarKind::binary) {
            if (!any_binary) out << "Binary\n";
            any_binary = true;
            out << ' ' << v.name << '\n';
        }
    out << "End\n";
    return out.str();
}

int linearize_binary_product(MILPModel& model, LinearizationMap& lin,
                             std::vector<int> vars) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    if (vars.size() < 2)
        throw ValidationError("milp: a binary product needs at least two distinct variables");
    const int n = static_cast<int>(model.variables.size());
    for (int id : vars) {
        if (id < 0 || id >= n)
            throw ValidationError("milp: binary product references unknown variable id " +
                                  std::to_string(id));
        if (model.variables[id].kind != VarKind::binary)
            throw ValidationError("milp: binary product operand " + model.variables[id].name +
                                  " is not binary");
    }
    if (auto it = lin.product_aux.find(vars); it != lin.product_aux.end()) return it->second;

    std::string name = "w";
    for (std::size_t i = 0; i < vars.size(); ++i)
        name += (i == 0 ? "" : "_") + model.variables[vars[i]].name;
    const int w = model.add_variable(name, VarKind::continuous, 0.0, 1.0);
    // w <= x_j for every operand; w >= sum x_j - (|J| - 1). Together with the
    // [0,1] bounds these pin w to the exact product at 0/1 operand values.
    for (std::size_t i = 0; i < vars.size(); ++i)
        model.add_constraint(name + "_le" + std::to_string(i),
                             {{w, 1.0}, {vars[i], -1.0}}, Relation::le, 0.0);
    std::vector<std::pair<int, double>> lower{{w, 1.0}};
    for (int id : vars) lower.emplace_back(id, -1.0);
    model.add_constraint(name + "_ge", std::move(lower), Relation::ge,
                         -(static_cast<double>(vars.size()) - 1.0));
    lin.product_aux.emplace(std::move(vars), w);
    lin.binary_valued.insert(w);
    return w;
}

int linearize_mixed_product(MILPModel& model, LinearizationMap& lin, int bin_var,
                            int cont_var) {
    const int n = static_cast<int>(model.variables.size());
    if (bin_var < 0 || bin_var >= n || cont_var < 0 || cont_var >= n)
        throw ValidationError("milp: mixed product references an unknown variable id");
    const bool bin_ok = model.variables[bin_var].kind == VarKind::binary ||
                        lin.binary_valued.count(bin_var) > 0;
    if (!bin_ok)
        throw ValidationError("milp: mixed product operand " +
                              model.variables[bin_var].name + " is not binary-valued");
    const Variable& cont = model.variables[cont_var];
    if (cont.kind != VarKind::continuous)
        throw ValidationError("milp: mixed product operand " + cont.name +
                              " must be continuous");
    if (cont.lower < 0.0 || cont.upper > 1.0)
        throw ValidationError("milp: mixed product needs " + cont.name +
                              " bounded inside [0,1], got [" + format_coeff(cont.lower) +
                              ", " + format_coeff(cont.upper) + "]");
    const auto key = std::make_pair(bin_var, cont_var);
    if (auto it = lin.mixed_aux.find(key); it != lin.mixed_aux.end()) return it->second;

    const std::string name =
        "z_" + model.variables[bin_var].name + "__" + model.variables[cont_var].name;
    const int z = model.add_variable(name, VarKind::continuous, 0.0, 1.0);
    // z <= bin, z <= cont, z >= cont - (1 - bin); z >= 0 sits in the bound.
    model.add_constraint(name + "_le_b", {{z, 1.0}, {bin_var, -1.0}}, Relation::le, 0.0);
    model.add_constraint(name + "_le_c", {{z, 1.0}, {cont_var, -1.0}}, Relation::le, 0.0);
    model.add_constraint(name + "_ge", {{z, 1.0}, {cont_var, -1.0}, {bin_var, -1.0}},
                         Relation::ge, -1.0);
    lin.mixed_aux.emplace(key, z);
    return z;
}

Problem1Build build_problem1(const Scenario& scenario, const CoverageCoefficients& coeffs) {
    validate_scenario(scenario);
    const std::size_t B = scenario.base_stations.size();
    const std::size_t S = scenario.demands.size();
    if (coeffs.bs_count != B || coeffs.sp_count != S)
        throw ValidationError("milp: coefficient table does not match the scenario shape");
    for (std::size_t b = 0; b < B; ++b) {
        if (coeffs.others.size() != B || coeffs.coeff.size() != B)
            throw ValidationError("milp: malformed coefficient table");
        for (std::size_t s = 0; s < S; ++s)
            if (coeffs.coeff[b][s].size() != (std::size_t{1} << coeffs.others[b].size()))
                throw ValidationError("milp: coefficient table has a truncated expansion");
    }

    Problem1Build out;
    MILPModel& m = out.model;
    out.x_var.resize(B);
    out.delta_var.assign(B, std::vector<int>(S, -1));

    for (std::size_t b = 0; b < B; ++b)
        out.x_var[b] = m.add_variable("x" + std::to_string(scenario.base_stations[b].id),
                                      VarKind::binary, 0.0, 1.0);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t s = 0; s < S; ++s)
            out.delta_var[b][s] = m.add_variable(
                "d" + std::to_string(scenario.base_stations[b].id) + "_" +
                    std::to_string(scenario.demands[s].sp_id),
                VarKind::continuous, 0.0, 1.0);

    for (std::size_t b = 0; b < B; ++b)
        m.objective.emplace_back(out.x_var[b], scenario.base_stations[b].lease_cost);

    // One linearized coverage row per SP. Product auxiliaries are created on
    // first use and shared across rows through the registry.
    out.coverage_row.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
        std::vector<std::pair<int, double>> terms;
        for (std::size_t b = 0; b < B; ++b) {
            const auto& row = coeffs.coeff[b][s];
            const auto& others = coeffs.others[b];
            for (std::size_t subset = 0; subset < row.size(); ++subset) {
                const double c = row[subset];
                if (std::fabs(c) < kCoeffDropTol) {
                    out.dropped_mass += std::fabs(c);
                    continue;
                }
                if (subset == 0) {
                    terms.emplace_back(out.delta_var[b][s], c);
                    continue;
                }
                int bin;
                if (std::has_single_bit(subset)) {
                    bin = out.x_var[others[std::countr_zero(subset)]];
                } else {
                    std::vector<int> ids;
                    for (std::size_t k = 0; k < others.size(); ++k)
                        if (subset & (std::size_t{1} << k)) ids.push_back(out.x_var[others[k]]);
                    bin = linearize_binary_product(m, out.lin, std::move(ids));
                }
                const int z = linearize_mixed_product(m, out.lin, bin, out.delta_var[b][s]);
                terms.emplace_back(z, c);
            }
        }
        out.coverage_row[s] = static_cast<int>(m.constraints.size());
        m.add_constraint("cover_s" + std::to_string(scenario.demands[s].sp_id),
                         std::move(terms), Relation::ge,
                         scenario.demands[s].min_coverage_prob);
    }

    // Per-BS time budget and lease linking.
    for (std::size_t b = 0; b < B; ++b) {
        const std::string bid = std::to_string(scenario.base_stations[b].id);
        std::vector<std::pair<int, double>> budget;
        for (std::size_t s = 0; s < S; ++s) budget.emplace_back(out.delta_var[b][s], 1.0);
        m.add_constraint("time_b" + bid, std::move(budget), Relation::le, 1.0);
        for (std::size_t s = 0; s < S; ++s)
            m.add_constraint(
                "link_b" + bid + "_s" + std::to_string(scenario.demands[s].sp_id),
                {{out.delta_var[b][s], 1.0}, {out.x_var[b], -1.0}}, Relation::le, 0.0);
    }

    m.validate();
    return out;
}

Allocation extract_allocation(const Problem1Build& build, const Scenario& scenario,
                              const std::vector<double>& solution) {
    const std::size_t B = scenario.base_stations.size();
    const std::size_t S = scenario.demands.size();
    if (build.x_var.size() != B || build.delta_var.size() != B)
        throw ValidationError("milp: build does not match the scenario shape");
    if (solution.size() != build.model.variables.size())
        throw ValidationError("milp: solution vector has the wrong length");

    Allocation alloc = Allocation::empty(scenario);
    for (std::size_t b = 0; b < B; ++b) {
        const double xv = solution[build.x_var[b]];
        if (std::fabs(xv - std::round(xv)) > 1e-6)
            throw ValidationError("milp: lease variable " +
                                  build.model.variables[build.x_var[b]].name +
                                  " is not integral: " + format_coeff(xv));
        alloc.leased[b] = std::round(xv) > 0.5 ? 1 : 0;
    }
    for (std::size_t b = 0; b < B; ++b) {
        if (!alloc.leased[b]) continue;
        double total = 0.0;
        for (std::size_t s = 0; s < S; ++s) {
            double d = solution[build.delta_var[b][s]];
            d = std::min(1.0, std::max(0.0, d));
            alloc.delta[b][s] = d;
            total += d;
        }
        if (total > 1.0) {
            for (std::size_t s = 0; s < S; ++s) alloc.delta[b][s] /= total;
            total = 1.0;
        }
        // Cleanup: leasing a BS that serves nobody only adds cost, so an
        // all-zero slice row means the lease flag can be dropped.
        if (total <= 1e-9) {
            alloc.leased[b] = 0;
            for (std::size_t s = 0; s < S; ++s) alloc.delta[b][s] = 0.0;
        }
    }
    validate_allocation(alloc, scenario);
    return alloc;
}

} // namespace vnet
