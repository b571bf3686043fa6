#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "griddeploy/plan.hpp"
#include "griddeploy/problem.hpp"

namespace griddeploy {

inline constexpr double kLatencyToleranceMs = 1e-9;
inline constexpr double kExhaustiveSearchGuard = 1e6;

enum class PlannerKind { RoundRobin, Constrained, Exhaustive };

inline const char* to_string(PlannerKind k) {
    switch (k) {
    case PlannerKind::RoundRobin: return "round-robin";
    case PlannerKind::Constrained: return "constrained";
    case PlannerKind::Exhaustive: return "exhaustive";
    }
    return "round-robin";
}

inline PlannerKind planner_kind_from_string(const std::string& s) {
    if (s == "round-robin") return PlannerKind::RoundRobin;
    if (s == "constrained") return PlannerKind::Constrained;
    if (s == "exhaustive") return PlannerKind::Exhaustive;
    throw ParseError("unknown planner \"" + s + "\"");
}

struct PlanCost {
    double objectiveValue = 0.0;
    bool feasible = false;
};

// ---------------------------------------------------------------------------
// Feasibility
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> host_group_members(const PlanningProblem& p,
                                                   const std::string& hostGroupId) {
    std::vector<std::string> members;
    for (const auto& [comp, ga] : p.partition.byComponent)
        if (ga.hostGroup == hostGroupId) members.push_back(comp);
    if (members.empty())
        throw LookupError("unknown host group \"" + hostGroupId + "\"");
    return members;
}

// Cheapest conceivable demand of a group, independent of any node. Used only
// to order groups in the greedy planner.
inline std::int64_t group_min_demand(const PlanningProblem& p,
                                     const std::vector<std::string>& members) {
    std::int64_t total = 0;
    for (const auto& m : members) {
        const ComponentDecl* c = p.assembly.find_component(m);
        std::int64_t best = 0;
        bool first = true;
        for (const auto& impl : c->implementations) {
            if (first || impl.memoryMB < best) best = impl.memoryMB;
            first = false;
        }
        total += best;
    }
    return total;
}

// Sum of the minimum memory over each member's platform-matching alternatives;
// empty when some member has no matching alternative at all.
inline std::optional<std::int64_t> min_matching_demand(const PlanningProblem& p,
                                                       const std::vector<std::string>& members,
                                                       const ComputeNode& node) {
    std::int64_t total = 0;
    for (const auto& m : members) {
        const ComponentDecl* c = p.assembly.find_component(m);
        std::optional<std::int64_t> best;
        for (const auto& impl : c->implementations)
            if (platform_matches(impl, node.arch, node.os))
                if (!best || impl.memoryMB < *best) best = impl.memoryMB;
        if (!best) return std::nullopt;
        total += *best;
    }
    return total;
}

// What the group actually costs when placed: the first matching alternative of
// each member, mirroring assemble_plan's selection rule.
inline std::optional<std::int64_t> actual_charge(const PlanningProblem& p,
                                                 const std::vector<std::string>& members,
                                                 const ComputeNode& node) {
    std::int64_t total = 0;
    for (const auto& m : members) {
        const ComponentDecl* c = p.assembly.find_component(m);
        auto idx = choose_implementation(*c, node);
        if (!idx) return std::nullopt;
        total += c->implementations[*idx].memoryMB;
    }
    return total;
}

inline bool pins_respected(const PlanningProblem& p, const std::vector<std::string>& members,
                           const ComputeNode& node) {
    for (const auto& m : members) {
        auto pin = p.goal.pins.find(m);
        if (pin != p.goal.pins.end() && !p.catalog.node_in_group(node.id, pin->second))
            return false;
    }
    return true;
}

// Feasibility of a host group on a node at the given free capacity: platform
// match for every member, summed minimum matching memory within the free
// figure, pins honored.
inline bool feasible_on(const PlanningProblem& p, const std::vector<std::string>& members,
                        const ComputeNode& node, std::int64_t freeMB) {
    auto demand = min_matching_demand(p, members, node);
    return demand && *demand <= freeMB && pins_respected(p, members, node);
}

// Planner admissibility: feasibility plus the requirement that the charge
// actually booked by assemble_plan fits too (the two differ only when a
// component declares several alternatives for one platform).
inline bool admissible_on(const PlanningProblem& p, const std::vector<std::string>& members,
                          const ComputeNode& node, std::int64_t freeMB) {
    if (!feasible_on(p, members, node, freeMB)) return false;
    auto charge = actual_charge(p, members, node);
    return charge && *charge <= freeMB;
}

inline std::map<std::string, std::int64_t> full_capacity(const GridCatalog& catalog) {
    std::map<std::string, std::int64_t> remaining;
    for (const auto& n : catalog.nodes_in_document_order()) remaining[n.id] = n.memoryMB;
    return remaining;
}

} // namespace detail

// Nodes able to host every member of the host group, in catalog document
// order: platform match for all members, summed minimum matching memory within
// capacity, and every pinned member under its pinned site.
inline std::vector<std::string> feasible_nodes(const PlanningProblem& problem,
                                               const std::string& hostGroupId) {
    auto members = detail::host_group_members(problem, hostGroupId);
    std::vector<std::string> out;
    for (const auto& node : problem.catalog.nodes_in_document_order())
        if (detail::feasible_on(problem, members, node, node.memoryMB)) out.push_back(node.id);
    return out;
}

// ---------------------------------------------------------------------------
// Objective evaluation
// ---------------------------------------------------------------------------

namespace detail {

struct ObjectiveAccumulator {
    explicit ObjectiveAccumulator(Objective obj) : objective(obj) {}

    Objective objective = Objective::None;
    double worst = 0.0;
    double total = 0.0;
    std::optional<double> minBandwidth;

    // Feed one inter-node connection's path metrics.
    void add(const LinkMetrics& m) {
        worst = std::max(worst, m.latencyMs);
        total += m.latencyMs;
        if (!is_unbounded(m.bandwidthMbps))
            minBandwidth = minBandwidth ? std::min(*minBandwidth, m.bandwidthMbps)
                                        : m.bandwidthMbps;
    }

    double value() const {
        switch (objective) {
        case Objective::None: return 0.0;
        case Objective::MinimizeWorstLatency: return worst;
        case Objective::MinimizeTotalLatency: return total;
        case Objective::MaximizeMinBandwidth: return minBandwidth ? -*minBandwidth : 0.0;
        }
        return 0.0;
    }
};

// Objective value of a complete host-group -> node assignment, iterating the
// assembly connections in connection-id order.
inline double cost_of_assignment(const PlanningProblem& p,
                                 const std::map<std::string, std::string>& nodeByHostGroup) {
    std::vector<const Connection*> conns;
    for (const auto& c : p.assembly.connections) conns.push_back(&c);
    std::sort(conns.begin(), conns.end(),
              [](const Connection* a, const Connection* b) { return a->id < b->id; });

    ObjectiveAccumulator acc(p.goal.objective);
    for (const Connection* c : conns) {
        const std::string& nodeA =
            nodeByHostGroup.at(p.partition.byComponent.at(c->from.component).hostGroup);
        const std::string& nodeB =
            nodeByHostGroup.at(p.partition.byComponent.at(c->to.component).hostGroup);
        if (nodeA == nodeB) continue;
        acc.add(path_metrics(p.catalog, nodeA, nodeB));
    }
    return acc.value();
}

inline bool bounds_satisfied(const Connection& conn, const LinkMetrics& m) {
    if (conn.maxLatencyMs && m.latencyMs > *conn.maxLatencyMs + kLatencyToleranceMs) return false;
    if (conn.minBandwidthMbps && m.bandwidthMbps < *conn.minBandwidthMbps) return false;
    return true;
}

// Connections between the group being placed and groups already placed:
// rejects bound violations, otherwise reports the marginal objective
// contribution of this candidate.
inline std::optional<double> marginal_score(
    const PlanningProblem& p, const std::string& hostGroupId, const std::string& candidateNode,
    const std::map<std::string, std::string>& placed) {
    ObjectiveAccumulator acc(p.goal.objective);
    for (const auto& conn : p.assembly.connections) {
        const std::string& groupA = p.partition.byComponent.at(conn.from.component).hostGroup;
        const std::string& groupB = p.partition.byComponent.at(conn.to.component).hostGroup;
        std::string otherGroup;
        if (groupA == hostGroupId && groupB != hostGroupId) otherGroup = groupB;
        else if (groupB == hostGroupId && groupA != hostGroupId) otherGroup = groupA;
        else continue;
        auto it = placed.find(otherGroup);
        if (it == placed.end()) continue;
        if (it->second == candidateNode) continue; // identity path always satisfies
        LinkMetrics m = path_metrics(p.catalog, candidateNode, it->second);
        if (!bounds_satisfied(conn, m)) return std::nullopt;
        acc.add(m);
    }
    return acc.value();
}

inline void verify_emitted_plan(const DeploymentPlan& plan, const char* plannerName) {
    for (const auto& c : plan.connections) {
        if (!c.satisfied(kLatencyToleranceMs))
            throw PlanInvalidError(std::string(plannerName) + " placement violates connection \"" +
                                   c.connectionId + "\" (measured latency " +
                                   format_number(c.measured.latencyMs) + " ms, bandwidth " +
                                   (is_unbounded(c.measured.bandwidthMbps)
                                        ? std::string("unbounded")
                                        : format_number(c.measured.bandwidthMbps)) +
                                   " Mbps)");
    }
}

inline std::vector<std::string> sorted_host_groups(const PlanningProblem& p) {
    std::set<std::string> ids;
    for (const auto& [comp, ga] : p.partition.byComponent) ids.insert(ga.hostGroup);
    return {ids.begin(), ids.end()};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Planners
// ---------------------------------------------------------------------------

// The proof-of-concept planner: host groups in lexicographic order, nodes from
// a wrapping cursor over the catalog's document order. Network requirements
// and the goal objective are ignored while placing; a placement that ends up
// violating a connection bound is rejected rather than returned.
inline DeploymentPlan plan_round_robin(const PlanningProblem& problem) {
    const auto& nodes = problem.catalog.nodes_in_document_order();
    auto remaining = detail::full_capacity(problem.catalog);
    std::map<std::string, std::string> placement;

    std::size_t cursor = 0;
    for (const auto& groupId : detail::sorted_host_groups(problem)) {
        auto members = detail::host_group_members(problem, groupId);
        std::optional<std::size_t> chosen;
        for (std::size_t k = 0; !chosen && k < nodes.size(); ++k) {
            std::size_t idx = (cursor + k) % nodes.size();
            if (detail::admissible_on(problem, members, nodes[idx], remaining[nodes[idx].id]))
                chosen = idx;
        }
        if (!chosen)
            throw InfeasibleError(groupId, "no feasible node for host group \"" + groupId + "\"");
        placement[groupId] = nodes[*chosen].id;
        remaining[nodes[*chosen].id] -=
            *detail::actual_charge(problem, members, nodes[*chosen]);
        cursor = (*chosen + 1) % nodes.size();
    }

    DeploymentPlan plan = assemble_plan(problem, placement);
    detail::verify_emitted_plan(plan, "round-robin");
    return plan;
}

// Greedy constrained planner: place the most memory-hungry host group first,
// pick the admissible node with the best marginal objective contribution
// against already-placed neighbors (ties: catalog document order).
inline DeploymentPlan plan_constrained(const PlanningProblem& problem) {
    auto groups = detail::sorted_host_groups(problem);
    std::map<std::string, std::vector<std::string>> membersOf;
    for (const auto& g : groups) membersOf[g] = detail::host_group_members(problem, g);
    std::stable_sort(groups.begin(), groups.end(), [&](const std::string& a, const std::string& b) {
        std::int64_t da = detail::group_min_demand(problem, membersOf[a]);
        std::int64_t db = detail::group_min_demand(problem, membersOf[b]);
        if (da != db) return da > db;
        return a < b;
    });

    const auto& nodes = problem.catalog.nodes_in_document_order();
    auto remaining = detail::full_capacity(problem.catalog);
    std::map<std::string, std::string> placement;

    for (const auto& groupId : groups) {
        const auto& members = membersOf[groupId];
        std::optional<std::size_t> best;
        double bestScore = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!detail::admissible_on(problem, members, nodes[i], remaining[nodes[i].id]))
                continue;
            auto score = detail::marginal_score(problem, groupId, nodes[i].id, placement);
            if (!score) continue;
            if (!best || *score < bestScore) {
                best = i;
                bestScore = *score;
            }
        }
        if (!best)
            throw InfeasibleError(
                groupId, "no admissible node for host group \"" + groupId +
                             "\"; greedy placement is incomplete, a feasible plan may still exist");
        placement[groupId] = nodes[*best].id;
        remaining[nodes[*best].id] -= *detail::actual_charge(problem, members, nodes[*best]);
    }

    DeploymentPlan plan = assemble_plan(problem, placement);
    detail::verify_emitted_plan(plan, "constrained");
    return plan;
}

// Exhaustive oracle planner: enumerates every capacity-respecting assignment
// in lexicographic (host group, catalog node) order and returns the first
// minimum-cost feasible one. Guarded so the search space stays desk-sized.
inline DeploymentPlan plan_exhaustive(const PlanningProblem& problem) {
    auto groups = detail::sorted_host_groups(problem);
    std::map<std::string, std::vector<std::string>> membersOf;
    double searchSpace = 1.0;
    std::string emptyGroup;
    for (const auto& g : groups) {
        membersOf[g] = detail::host_group_members(problem, g);
        std::size_t count = feasible_nodes(problem, g).size();
        if (count == 0 && emptyGroup.empty()) emptyGroup = g;
        searchSpace *= double(count);
    }
    if (searchSpace > kExhaustiveSearchGuard)
        throw SearchGuardError("search space of " + format_number(searchSpace) +
                               " assignments exceeds the guard of " +
                               format_number(kExhaustiveSearchGuard));
    if (!emptyGroup.empty())
        throw InfeasibleError(emptyGroup, "no feasible assignment: host group \"" + emptyGroup +
                                              "\" has no feasible node");

    const auto& nodes = problem.catalog.nodes_in_document_order();
    auto remaining = detail::full_capacity(problem.catalog);
    std::map<std::string, std::string> current;
    std::optional<std::map<std::string, std::string>> bestAssignment;
    double bestCost = 0.0;

    // Bounds against already-placed groups; intra-group connections ride the
    // identity path and always hold.
    auto placementOk = [&](const std::string& groupId, const std::string& nodeId) {
        for (const auto& conn : problem.assembly.connections) {
            if (!conn.has_requirement()) continue;
            const std::string& ga = problem.partition.byComponent.at(conn.from.component).hostGroup;
            const std::string& gb = problem.partition.byComponent.at(conn.to.component).hostGroup;
            std::string other;
            if (ga == groupId && gb != groupId) other = gb;
            else if (gb == groupId && ga != groupId) other = ga;
            else continue;
            auto it = current.find(other);
            if (it == current.end()) continue;
            if (it->second == nodeId) continue;
            if (!detail::bounds_satisfied(conn, path_metrics(problem.catalog, nodeId, it->second)))
                return false;
        }
        return true;
    };

    auto dfs = [&](auto&& self, std::size_t depth) -> void {
        if (depth == groups.size()) {
            double cost = detail::cost_of_assignment(problem, current);
            if (!bestAssignment || cost < bestCost) {
                bestAssignment = current;
                bestCost = cost;
            }
            return;
        }
        const std::string& groupId = groups[depth];
        const auto& members = membersOf.at(groupId);
        for (const auto& node : nodes) {
            if (!detail::admissible_on(problem, members, node, remaining[node.id])) continue;
            if (!placementOk(groupId, node.id)) continue;
            std::int64_t charge = *detail::actual_charge(problem, members, node);
            remaining[node.id] -= charge;
            current[groupId] = node.id;
            self(self, depth + 1);
            current.erase(groupId);
            remaining[node.id] += charge;
        }
    };
    dfs(dfs, 0);

    if (!bestAssignment)
        throw InfeasibleError("", "no feasible assignment satisfies all constraints");
    return assemble_plan(problem, *bestAssignment);
}

inline DeploymentPlan run_planner(PlannerKind kind, const PlanningProblem& problem) {
    switch (kind) {
    case PlannerKind::RoundRobin: return plan_round_robin(problem);
    case PlannerKind::Constrained: return plan_constrained(problem);
    case PlannerKind::Exhaustive: return plan_exhaustive(problem);
    }
    throw Error("unreachable planner kind");
}

// ---------------------------------------------------------------------------
// Plan checking and cost
// ---------------------------------------------------------------------------

namespace finding_code {
inline constexpr const char* kComponentMappingViolated = "COMPONENT_MAPPING_VIOLATED";
inline constexpr const char* kProcessCollocationViolated = "PROCESS_COLLOCATION_VIOLATED";
inline constexpr const char* kHostCollocationViolated = "HOST_COLLOCATION_VIOLATED";
inline constexpr const char* kArchOsMismatch = "ARCH_OS_MISMATCH";
inline constexpr const char* kMemoryCapacityExceeded = "MEMORY_CAPACITY_EXCEEDED";
inline constexpr const char* kPinViolated = "PIN_VIOLATED";
inline constexpr const char* kConnectionRequirementViolated = "CONNECTION_REQUIREMENT_VIOLATED";
inline constexpr const char* kConnectionMetricsStale = "CONNECTION_METRICS_STALE";
inline constexpr const char* kConnectionMappingViolated = "CONNECTION_MAPPING_VIOLATED";
inline constexpr const char* kDataFlowViolated = "DATA_FLOW_VIOLATED";
inline constexpr const char* kLaunchOrderViolated = "LAUNCH_ORDER_VIOLATED";
} // namespace finding_code

// Independent soundness oracle: verifies a plan against the problem from
// scratch, without trusting any planner bookkeeping.
inline ValidationReport check_plan(const PlanningProblem& problem, const DeploymentPlan& plan) {
    namespace fc = finding_code;
    ValidationReport report;

    // Component coverage: every assembly component on exactly one server.
    std::map<std::string, int> seen;
    std::map<std::string, const ServerPlacement*> serverOfComponent;
    for (const auto& s : plan.servers) {
        for (const auto& c : s.components) {
            ++seen[c.id];
            serverOfComponent[c.id] = &s;
            if (!problem.assembly.find_component(c.id))
                report.add(Severity::Error, fc::kComponentMappingViolated, c.id,
                           "plan places a component the assembly does not declare");
        }
    }
    for (const auto& c : problem.assembly.components) {
        auto it = seen.find(c.id);
        if (it == seen.end())
            report.add(Severity::Error, fc::kComponentMappingViolated, c.id,
                       "component is not placed on any server");
        else if (it->second > 1)
            report.add(Severity::Error, fc::kComponentMappingViolated, c.id,
                       "component is placed more than once");
    }

    // Server composition must equal the derived process groups.
    auto processGroups = problem.partition.process_groups();
    for (const auto& s : plan.servers) {
        auto pg = processGroups.find(s.serverId);
        if (pg == processGroups.end()) {
            report.add(Severity::Error, fc::kProcessCollocationViolated, s.serverId,
                       "server id is not a derived process group");
            continue;
        }
        std::set<std::string> got;
        for (const auto& c : s.components) got.insert(c.id);
        std::set<std::string> want(pg->second.begin(), pg->second.end());
        if (got != want)
            report.add(Severity::Error, fc::kProcessCollocationViolated, s.serverId,
                       "server component set differs from its process group");
    }
    for (const auto& [groupId, members] : processGroups) {
        if (!plan.find_server(groupId))
            report.add(Severity::Error, fc::kProcessCollocationViolated, groupId,
                       "process group has no server in the plan");
    }

    // Host collocation: every process group of a host group on one node.
    for (const auto& [hostGroup, procGroups] : problem.partition.process_groups_of_host()) {
        std::set<std::string> nodesUsed;
        for (const auto& pg : procGroups)
            if (const ServerPlacement* s = plan.find_server(pg)) nodesUsed.insert(s->nodeId);
        if (nodesUsed.size() > 1)
            report.add(Severity::Error, fc::kHostCollocationViolated, hostGroup,
                       "members of one host group are placed on different nodes");
    }

    // Platform, memory, pins.
    std::map<std::string, std::int64_t> usedMB;
    for (const auto& s : plan.servers) {
        if (!problem.catalog.has_node(s.nodeId)) {
            report.add(Severity::Error, fc::kArchOsMismatch, s.serverId,
                       "server is placed on unknown node \"" + s.nodeId + "\"");
            continue;
        }
        const ComputeNode& node = problem.catalog.node(s.nodeId);
        for (const auto& c : s.components) {
            const ComponentDecl* decl = problem.assembly.find_component(c.id);
            if (!decl) continue;
            if (c.implementationIndex < 0 ||
                std::size_t(c.implementationIndex) >= decl->implementations.size()) {
                report.add(Severity::Error, fc::kArchOsMismatch, c.id,
                           "implementation index out of range");
                continue;
            }
            const auto& impl = decl->implementations[c.implementationIndex];
            if (!platform_matches(impl, node.arch, node.os))
                report.add(Severity::Error, fc::kArchOsMismatch, c.id,
                           "chosen implementation (" + impl.arch + "/" + impl.os +
                               ") does not match node \"" + node.id + "\" (" + node.arch + "/" +
                               node.os + ")");
            else
                usedMB[node.id] += impl.memoryMB;
            auto pin = problem.goal.pins.find(c.id);
            if (pin != problem.goal.pins.end() && problem.catalog.has_group(pin->second) &&
                !problem.catalog.node_in_group(node.id, pin->second))
                report.add(Severity::Error, fc::kPinViolated, c.id,
                           "component is pinned to group \"" + pin->second +
                               "\" but placed on node \"" + node.id + "\"");
        }
    }
    for (const auto& [nodeId, used] : usedMB) {
        if (used > problem.catalog.node(nodeId).memoryMB)
            report.add(Severity::Error, fc::kMemoryCapacityExceeded, nodeId,
                       "placed servers need " + std::to_string(used) + " MB but node offers " +
                           std::to_string(problem.catalog.node(nodeId).memoryMB) + " MB");
    }

    // Connections: one ConnectionPlan per assembly connection, fresh metrics,
    // bounds honored; data flows exactly for inter-server connections.
    std::map<std::string, const ConnectionPlan*> planConn;
    for (const auto& c : plan.connections) {
        if (!planConn.emplace(c.connectionId, &c).second)
            report.add(Severity::Error, fc::kConnectionMappingViolated, c.connectionId,
                       "connection appears more than once in the plan");
    }
    std::map<std::string, const DataFlow*> planFlow;
    for (const auto& f : plan.dataFlows) {
        if (!planFlow.emplace(f.connectionId, &f).second)
            report.add(Severity::Error, fc::kDataFlowViolated, f.connectionId,
                       "data flow appears more than once in the plan");
    }
    std::set<std::string> declaredConnections;
    for (const auto& conn : problem.assembly.connections) {
        declaredConnections.insert(conn.id);
        auto sa = serverOfComponent.find(conn.from.component);
        auto sb = serverOfComponent.find(conn.to.component);
        if (sa == serverOfComponent.end() || sb == serverOfComponent.end()) continue;
        auto it = planConn.find(conn.id);
        if (it == planConn.end()) {
            report.add(Severity::Error, fc::kConnectionMappingViolated, conn.id,
                       "assembly connection missing from the plan");
            continue;
        }
        const ConnectionPlan& cp = *it->second;
        if (cp.sourceServer != sa->second->serverId || cp.targetServer != sb->second->serverId)
            report.add(Severity::Error, fc::kConnectionMappingViolated, conn.id,
                       "connection endpoints mapped to the wrong servers");
        if (problem.catalog.has_node(sa->second->nodeId) &&
            problem.catalog.has_node(sb->second->nodeId)) {
            LinkMetrics fresh =
                path_metrics(problem.catalog, sa->second->nodeId, sb->second->nodeId);
            if (std::abs(fresh.latencyMs - cp.measured.latencyMs) > kLatencyToleranceMs ||
                fresh.bandwidthMbps != cp.measured.bandwidthMbps)
                report.add(Severity::Error, fc::kConnectionMetricsStale, conn.id,
                           "stored path metrics differ from the catalog");
            if (conn.maxLatencyMs && fresh.latencyMs > *conn.maxLatencyMs + kLatencyToleranceMs)
                report.add(Severity::Error, fc::kConnectionRequirementViolated, conn.id,
                           "measured latency " + format_number(fresh.latencyMs) +
                               " ms exceeds bound " + format_number(*conn.maxLatencyMs) + " ms");
            if (conn.minBandwidthMbps && fresh.bandwidthMbps < *conn.minBandwidthMbps)
                report.add(Severity::Error, fc::kConnectionRequirementViolated, conn.id,
                           "measured bandwidth " +
                               (is_unbounded(fresh.bandwidthMbps)
                                    ? std::string("unbounded")
                                    : format_number(fresh.bandwidthMbps)) +
                               " Mbps is below bound " + format_number(*conn.minBandwidthMbps) +
                               " Mbps");
        }
        bool interServer = sa->second->serverId != sb->second->serverId;
        auto flow = planFlow.find(conn.id);
        if (interServer && flow == planFlow.end())
            report.add(Severity::Error, fc::kDataFlowViolated, conn.id,
                       "inter-server connection has no data flow");
        if (!interServer && flow != planFlow.end())
            report.add(Severity::Error, fc::kDataFlowViolated, conn.id,
                       "intra-server connection must not have a data flow");
        if (interServer && flow != planFlow.end() &&
            (flow->second->producer != sa->second->serverId ||
             flow->second->consumer != sb->second->serverId))
            report.add(Severity::Error, fc::kDataFlowViolated, conn.id,
                       "data flow endpoints do not match the connection");
    }
    for (const auto& [connId, cp] : planConn)
        if (!declaredConnections.count(connId))
            report.add(Severity::Error, fc::kConnectionMappingViolated, connId,
                       "plan carries a connection the assembly does not declare");
    for (const auto& [connId, f] : planFlow)
        if (!declaredConnections.count(connId))
            report.add(Severity::Error, fc::kDataFlowViolated, connId,
                       "plan carries a data flow the assembly does not declare");

    // Launch order: a permutation, infrastructure first, producers before
    // consumers outside cyclic strongly connected parts.
    {
        std::set<std::string> serverIds;
        for (const auto& s : plan.servers) serverIds.insert(s.serverId);
        std::set<std::string> orderIds(plan.launchOrder.begin(), plan.launchOrder.end());
        if (orderIds.size() != plan.launchOrder.size() || orderIds != serverIds) {
            report.add(Severity::Error, fc::kLaunchOrderViolated, "launchOrder",
                       "launch order is not a permutation of the server ids");
        } else {
            std::map<std::string, std::size_t> pos;
            for (std::size_t i = 0; i < plan.launchOrder.size(); ++i)
                pos[plan.launchOrder[i]] = i;
            std::size_t lastInfra = 0, firstRegular = plan.launchOrder.size();
            bool anyInfra = false, anyRegular = false;
            for (const auto& s : plan.servers) {
                if (s.infrastructure) {
                    lastInfra = std::max(lastInfra, pos[s.serverId]);
                    anyInfra = true;
                } else {
                    firstRegular = std::min(firstRegular, pos[s.serverId]);
                    anyRegular = true;
                }
            }
            if (anyInfra && anyRegular && lastInfra > firstRegular)
                report.add(Severity::Error, fc::kLaunchOrderViolated, "launchOrder",
                           "an infrastructure server launches after a regular server");

            std::set<std::string> regular;
            for (const auto& s : plan.servers)
                if (!s.infrastructure) regular.insert(s.serverId);
            std::map<std::string, std::set<std::string>> successors;
            for (const auto& f : plan.dataFlows)
                if (regular.count(f.producer) && regular.count(f.consumer) &&
                    f.producer != f.consumer)
                    successors[f.producer].insert(f.consumer);
            auto sccs = detail::strongly_connected(regular, successors);
            std::map<std::string, std::size_t> sccOf;
            for (std::size_t i = 0; i < sccs.size(); ++i)
                for (const auto& id : sccs[i]) sccOf[id] = i;
            bool hasCycleWarning =
                std::find(plan.warnings.begin(), plan.warnings.end(), kCycleWarning) !=
                plan.warnings.end();
            for (const auto& [producer, consumers] : successors) {
                for (const auto& consumer : consumers) {
                    if (sccOf[producer] == sccOf[consumer]) {
                        if (!hasCycleWarning)
                            report.add(Severity::Error, fc::kLaunchOrderViolated, producer,
                                       "cyclic data flow without a cycle warning");
                    } else if (pos[producer] > pos[consumer]) {
                        report.add(Severity::Error, fc::kLaunchOrderViolated, producer,
                                   "producer \"" + producer + "\" launches after consumer \"" +
                                       consumer + "\"");
                    }
                }
            }
        }
    }

    report.sort_canonical();
    return report;
}

// Objective value of a checked plan. Latency objectives aggregate inter-node
// connections only; the bandwidth objective negates the smallest bounded
// inter-node bandwidth.
inline PlanCost plan_cost(const PlanningProblem& problem, const DeploymentPlan& plan) {
    ValidationReport report = check_plan(problem, plan);
    if (!report.empty())
        throw PlanInvalidError("plan does not pass check_plan: " +
                               report.findings.front().line());

    detail::ObjectiveAccumulator acc(problem.goal.objective);
    for (const auto& c : plan.connections) {
        const ServerPlacement* a = plan.find_server(c.sourceServer);
        const ServerPlacement* b = plan.find_server(c.targetServer);
        if (a->nodeId == b->nodeId) continue;
        acc.add(c.measured);
    }
    return {acc.value(), true};
}

} // namespace griddeploy
