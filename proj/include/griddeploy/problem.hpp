#pragma once

#include <string>

#include "griddeploy/assembly.hpp"
#include "griddeploy/catalog.hpp"
#include "griddeploy/sha256.hpp"

namespace griddeploy {

// The planner's full input: application side, resource side, and the
// user-level goal that belongs to neither.
struct PlanningProblem {
    ComponentAssembly assembly;
    CollocationPartition partition; // always normalize_collocation(assembly)
    GridCatalog catalog;
    UserGoal goal;
};

// Validates the assembly, derives the partition, and checks goal pins against
// both inputs.
inline PlanningProblem make_problem(ComponentAssembly assembly, GridCatalog catalog,
                                    UserGoal goal) {
    ValidationReport report = validate_assembly(assembly);
    if (report.has_errors()) throw ValidationError(std::move(report));

    PlanningProblem p;
    p.partition = normalize_collocation(assembly);
    for (const auto& [component, site] : goal.pins) {
        if (!assembly.find_component(component))
            throw LookupError("goal pins unknown component \"" + component + "\"");
        if (!catalog.has_group(site))
            throw LookupError("goal pins component \"" + component + "\" to unknown group \"" +
                              site + "\"");
    }
    p.assembly = std::move(assembly);
    p.catalog = std::move(catalog);
    p.goal = std::move(goal);
    return p;
}

inline PlanningProblem make_problem(ComponentAssembly assembly, GridCatalog catalog) {
    UserGoal goal = assembly.goal.value_or(UserGoal{});
    return make_problem(std::move(assembly), std::move(catalog), std::move(goal));
}

// Content digest pinning a plan to its exact inputs.
inline std::string problem_digest(const ComponentAssembly& assembly, const GridCatalog& catalog,
                                  const UserGoal& goal) {
    std::string canonical = assembly_to_json(assembly).dump() + "\n" +
                            catalog_to_json(catalog).dump() + "\n" + goal_to_json(goal).dump();
    return sha256_hex(canonical);
}

inline std::string problem_digest(const PlanningProblem& p) {
    return problem_digest(p.assembly, p.catalog, p.goal);
}

} // namespace griddeploy
