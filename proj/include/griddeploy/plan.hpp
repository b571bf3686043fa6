#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "griddeploy/problem.hpp"

namespace griddeploy {

inline constexpr const char* kCycleWarning = "CYCLE_WARNING";

// ---------------------------------------------------------------------------
// Plan types
// ---------------------------------------------------------------------------

struct ComponentAssignment {
    std::string id;
    int implementationIndex = 0;

    bool operator==(const ComponentAssignment&) const = default;
};

// One component server: the process hosting a process group on one node.
struct ServerPlacement {
    std::string serverId; // equals its process-group id
    std::string nodeId;
    std::vector<ComponentAssignment> components;
    bool infrastructure = false;

    bool operator==(const ServerPlacement&) const = default;
};

struct DataFlow {
    std::string producer; // server id
    std::string consumer; // server id
    std::string connectionId;

    bool operator==(const DataFlow&) const = default;
};

struct ConnectionBounds {
    std::optional<double> maxLatencyMs;
    std::optional<double> minBandwidthMbps;

    bool operator==(const ConnectionBounds&) const = default;
};

struct ConnectionPlan {
    std::string connectionId;
    std::string sourceServer;
    std::string targetServer;
    LinkMetrics measured;
    ConnectionBounds required;

    bool satisfied(double latencyToleranceMs = 1e-9) const {
        if (required.maxLatencyMs && measured.latencyMs > *required.maxLatencyMs + latencyToleranceMs)
            return false;
        if (required.minBandwidthMbps && measured.bandwidthMbps < *required.minBandwidthMbps)
            return false;
        return true;
    }

    bool operator==(const ConnectionPlan&) const = default;
};

struct DeploymentPlan {
    std::string problemDigest;
    std::vector<ServerPlacement> servers; // sorted by serverId
    std::vector<std::string> launchOrder; // permutation of server ids
    std::vector<DataFlow> dataFlows;      // sorted by connectionId
    std::vector<ConnectionPlan> connections; // sorted by connectionId
    std::vector<std::string> warnings;

    const ServerPlacement* find_server(std::string_view id) const {
        for (const auto& s : servers)
            if (s.serverId == id) return &s;
        return nullptr;
    }

    bool operator==(const DeploymentPlan&) const = default;
};

// ---------------------------------------------------------------------------
// Launch order
// ---------------------------------------------------------------------------

struct LaunchOrderResult {
    std::vector<std::string> order;
    std::vector<std::string> warnings;
};

namespace detail {

// Strongly connected components of the subgraph induced by `alive`, by
// iterative Tarjan. Used to peel cyclic data flows deterministically.
inline std::vector<std::vector<std::string>> strongly_connected(
    const std::set<std::string>& alive,
    const std::map<std::string, std::set<std::string>>& successors) {
    std::map<std::string, int> index, low;
    std::set<std::string> onStack;
    std::vector<std::string> stack;
    std::vector<std::vector<std::string>> sccs;
    int counter = 0;

    struct Frame {
        std::string node;
        std::vector<std::string> next;
        std::size_t pos = 0;
    };

    for (const auto& start : alive) {
        if (index.count(start)) continue;
        std::vector<Frame> frames;
        auto openFrame = [&](const std::string& v) {
            index[v] = low[v] = counter++;
            stack.push_back(v);
            onStack.insert(v);
            Frame f;
            f.node = v;
            if (auto it = successors.find(v); it != successors.end())
                for (const auto& w : it->second)
                    if (alive.count(w)) f.next.push_back(w);
            frames.push_back(std::move(f));
        };
        openFrame(start);
        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.pos < f.next.size()) {
                const std::string& w = f.next[f.pos++];
                if (!index.count(w)) {
                    openFrame(w);
                } else if (onStack.count(w)) {
                    low[f.node] = std::min(low[f.node], index[w]);
                }
            } else {
                if (low[f.node] == index[f.node]) {
                    std::vector<std::string> scc;
                    while (true) {
                        std::string w = stack.back();
                        stack.pop_back();
                        onStack.erase(w);
                        scc.push_back(w);
                        if (w == f.node) break;
                    }
                    std::sort(scc.begin(), scc.end());
                    sccs.push_back(std::move(scc));
                }
                std::string done = f.node;
                frames.pop_back();
                if (!frames.empty())
                    low[frames.back().node] = std::min(low[frames.back().node], low[done]);
            }
        }
    }
    return sccs;
}

} // namespace detail

// Infrastructure servers first (lexicographic), then Kahn's algorithm over the
// data-flow edges with lexicographic tie-breaking. When only cycles remain,
// the source cycle with the smallest member is emitted in lexicographic order
// and a CYCLE_WARNING is recorded.
inline LaunchOrderResult compute_launch_order(const std::vector<ServerPlacement>& servers,
                                              const std::vector<DataFlow>& dataFlows) {
    LaunchOrderResult result;

    std::set<std::string> regular;
    for (const auto& s : servers) {
        if (s.infrastructure) result.order.push_back(s.serverId);
        else regular.insert(s.serverId);
    }
    std::sort(result.order.begin(), result.order.end());

    std::map<std::string, std::set<std::string>> successors;
    std::map<std::string, int> inDegree;
    for (const auto& id : regular) inDegree[id] = 0;
    for (const auto& f : dataFlows) {
        if (!regular.count(f.producer) || !regular.count(f.consumer)) continue;
        if (f.producer == f.consumer) continue;
        if (successors[f.producer].insert(f.consumer).second) ++inDegree[f.consumer];
    }

    std::set<std::string> ready;
    for (const auto& [id, deg] : inDegree)
        if (deg == 0) ready.insert(id);
    std::set<std::string> remaining = regular;

    auto emit = [&](const std::string& id) {
        result.order.push_back(id);
        remaining.erase(id);
        ready.erase(id);
        if (auto it = successors.find(id); it != successors.end()) {
            for (const auto& succ : it->second)
                if (remaining.count(succ) && --inDegree[succ] == 0) ready.insert(succ);
        }
    };

    bool cycleSeen = false;
    while (!remaining.empty()) {
        if (!ready.empty()) {
            emit(*ready.begin());
            continue;
        }
        // Only cycles (and their downstream) left: peel the source cycle
        // containing the smallest id.
        auto sccs = detail::strongly_connected(remaining, successors);
        std::map<std::string, std::size_t> sccOf;
        for (std::size_t i = 0; i < sccs.size(); ++i)
            for (const auto& id : sccs[i]) sccOf[id] = i;
        std::vector<bool> hasExternalIn(sccs.size(), false);
        for (const auto& [from, succs] : successors) {
            if (!remaining.count(from)) continue;
            for (const auto& to : succs) {
                if (!remaining.count(to)) continue;
                if (sccOf[from] != sccOf[to]) hasExternalIn[sccOf[to]] = true;
            }
        }
        const std::vector<std::string>* pick = nullptr;
        for (std::size_t i = 0; i < sccs.size(); ++i) {
            if (hasExternalIn[i] || sccs[i].size() < 2) continue;
            if (!pick || sccs[i].front() < pick->front()) pick = &sccs[i];
        }
        cycleSeen = true;
        if (!pick) {
            // Self-loops were dropped above, so a stuck state always has a
            // multi-node source cycle; this is unreachable but keeps the loop
            // total.
            std::vector<std::string> rest(remaining.begin(), remaining.end());
            for (const auto& id : rest) emit(id);
            break;
        }
        for (const auto& id : *pick) emit(id);
    }
    if (cycleSeen) result.warnings.push_back(kCycleWarning);
    return result;
}

// ---------------------------------------------------------------------------
// Plan assembly
// ---------------------------------------------------------------------------

// First declared implementation alternative matching the node's platform.
inline std::optional<int> choose_implementation(const ComponentDecl& component,
                                                const ComputeNode& node) {
    for (std::size_t i = 0; i < component.implementations.size(); ++i)
        if (platform_matches(component.implementations[i], node.arch, node.os)) return int(i);
    return std::nullopt;
}

// Builds the full plan from a host-group -> node placement: one server per
// process group, data flows between distinct servers, measured path metrics
// for every assembly connection, and the launch order.
inline DeploymentPlan assemble_plan(const PlanningProblem& problem,
                                    const std::map<std::string, std::string>& nodeByHostGroup) {
    DeploymentPlan plan;
    plan.problemDigest = problem_digest(problem);

    std::map<std::string, std::string> serverOfComponent;
    for (const auto& [processGroup, members] : problem.partition.process_groups()) {
        const std::string& hostGroup = problem.partition.byComponent.at(members.front()).hostGroup;
        auto placed = nodeByHostGroup.find(hostGroup);
        if (placed == nodeByHostGroup.end())
            throw LookupError("placement is missing host group \"" + hostGroup + "\"");
        const ComputeNode& node = problem.catalog.node(placed->second);

        ServerPlacement server;
        server.serverId = processGroup;
        server.nodeId = node.id;
        // Assembly declaration order within the server.
        for (const auto& c : problem.assembly.components) {
            if (problem.partition.byComponent.at(c.id).processGroup != processGroup) continue;
            auto impl = choose_implementation(c, node);
            if (!impl)
                throw InfeasibleError(hostGroup, "component \"" + c.id +
                                                     "\" has no implementation for node \"" +
                                                     node.id + "\" (" + node.arch + "/" + node.os +
                                                     ")");
            server.components.push_back({c.id, *impl});
            server.infrastructure = server.infrastructure || c.infrastructure;
            serverOfComponent[c.id] = processGroup;
        }
        plan.servers.push_back(std::move(server));
    }
    std::sort(plan.servers.begin(), plan.servers.end(),
              [](const ServerPlacement& a, const ServerPlacement& b) {
                  return a.serverId < b.serverId;
              });

    for (const auto& conn : problem.assembly.connections) {
        const std::string& sourceServer = serverOfComponent.at(conn.from.component);
        const std::string& targetServer = serverOfComponent.at(conn.to.component);
        if (sourceServer != targetServer)
            plan.dataFlows.push_back({sourceServer, targetServer, conn.id});

        ConnectionPlan cp;
        cp.connectionId = conn.id;
        cp.sourceServer = sourceServer;
        cp.targetServer = targetServer;
        cp.measured = path_metrics(problem.catalog, plan.find_server(sourceServer)->nodeId,
                                   plan.find_server(targetServer)->nodeId);
        cp.required = {conn.maxLatencyMs, conn.minBandwidthMbps};
        plan.connections.push_back(std::move(cp));
    }
    auto byConnectionId = [](const auto& a, const auto& b) {
        return a.connectionId < b.connectionId;
    };
    std::sort(plan.dataFlows.begin(), plan.dataFlows.end(), byConnectionId);
    std::sort(plan.connections.begin(), plan.connections.end(), byConnectionId);

    LaunchOrderResult order = compute_launch_order(plan.servers, plan.dataFlows);
    plan.launchOrder = std::move(order.order);
    plan.warnings = std::move(order.warnings);
    return plan;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json plan_to_json(const DeploymentPlan& plan) {
    json servers = json::array();
    for (const auto& s : plan.servers) {
        json comps = json::array();
        for (const auto& c : s.components)
            comps.push_back(json{{"id", c.id}, {"implementationIndex", c.implementationIndex}});
        servers.push_back(json{{"serverId", s.serverId},
                               {"nodeId", s.nodeId},
                               {"infrastructure", s.infrastructure},
                               {"components", std::move(comps)}});
    }
    json flows = json::array();
    for (const auto& f : plan.dataFlows)
        flows.push_back(json{{"producer", f.producer},
                             {"consumer", f.consumer},
                             {"connectionId", f.connectionId}});
    json connections = json::array();
    for (const auto& c : plan.connections) {
        json required = json::object();
        if (c.required.maxLatencyMs) required["maxLatencyMs"] = *c.required.maxLatencyMs;
        if (c.required.minBandwidthMbps)
            required["minBandwidthMbps"] = *c.required.minBandwidthMbps;
        connections.push_back(json{{"connectionId", c.connectionId},
                                   {"sourceServer", c.sourceServer},
                                   {"targetServer", c.targetServer},
                                   {"measured", link_metrics_to_json(c.measured)},
                                   {"required", std::move(required)}});
    }
    return json{{"formatVersion", 1},
                {"problemDigest", plan.problemDigest},
                {"servers", std::move(servers)},
                {"launchOrder", plan.launchOrder},
                {"dataFlows", std::move(flows)},
                {"connections", std::move(connections)},
                {"warnings", plan.warnings}};
}

inline std::string serialize_plan(const DeploymentPlan& plan) {
    return plan_to_json(plan).dump(2) + "\n";
}

inline DeploymentPlan deserialize_plan(std::string_view text) {
    json j = parse_json_document(text);
    expect_object(j, "plan");
    check_keys(j, "plan", {"formatVersion", "problemDigest", "servers", "launchOrder", "dataFlows",
                           "connections", "warnings"});
    require_format_version(j, "plan");

    DeploymentPlan plan;
    plan.problemDigest = get_string(j, "problemDigest", "plan");

    const json& servers = get_member(j, "servers", "plan");
    expect_array(servers, "plan.servers");
    for (std::size_t i = 0; i < servers.size(); ++i) {
        std::string ctx = "servers[" + std::to_string(i) + "]";
        const json& sj = servers[i];
        expect_object(sj, ctx);
        check_keys(sj, ctx, {"serverId", "nodeId", "infrastructure", "components"});
        ServerPlacement s;
        s.serverId = get_string(sj, "serverId", ctx);
        s.nodeId = get_string(sj, "nodeId", ctx);
        s.infrastructure = get_bool_or(sj, "infrastructure", false, ctx);
        const json& comps = get_member(sj, "components", ctx);
        expect_array(comps, ctx + ".components");
        for (std::size_t k = 0; k < comps.size(); ++k) {
            std::string cctx = ctx + ".components[" + std::to_string(k) + "]";
            const json& cj = comps[k];
            expect_object(cj, cctx);
            check_keys(cj, cctx, {"id", "implementationIndex"});
            s.components.push_back(
                {get_string(cj, "id", cctx), int(get_int(cj, "implementationIndex", cctx))});
        }
        if (s.components.empty()) throw ParseError(ctx + ": server has no components");
        plan.servers.push_back(std::move(s));
    }

    const json& order = get_member(j, "launchOrder", "plan");
    expect_array(order, "plan.launchOrder");
    for (const auto& v : order) {
        if (!v.is_string()) throw ParseError("plan.launchOrder: expected strings");
        plan.launchOrder.push_back(v.get<std::string>());
    }

    const json& flows = get_member(j, "dataFlows", "plan");
    expect_array(flows, "plan.dataFlows");
    for (std::size_t i = 0; i < flows.size(); ++i) {
        std::string ctx = "dataFlows[" + std::to_string(i) + "]";
        const json& fj = flows[i];
        expect_object(fj, ctx);
        check_keys(fj, ctx, {"producer", "consumer", "connectionId"});
        plan.dataFlows.push_back({get_string(fj, "producer", ctx),
                                  get_string(fj, "consumer", ctx),
                                  get_string(fj, "connectionId", ctx)});
    }

    const json& conns = get_member(j, "connections", "plan");
    expect_array(conns, "plan.connections");
    for (std::size_t i = 0; i < conns.size(); ++i) {
        std::string ctx = "connections[" + std::to_string(i) + "]";
        const json& cj = conns[i];
        expect_object(cj, ctx);
        check_keys(cj, ctx, {"connectionId", "sourceServer", "targetServer", "measured", "required"});
        ConnectionPlan c;
        c.connectionId = get_string(cj, "connectionId", ctx);
        c.sourceServer = get_string(cj, "sourceServer", ctx);
        c.targetServer = get_string(cj, "targetServer", ctx);
        c.measured = link_metrics_from_json(get_member(cj, "measured", ctx), ctx + ".measured");
        const json& rj = get_member(cj, "required", ctx);
        expect_object(rj, ctx + ".required");
        check_keys(rj, ctx + ".required", {"maxLatencyMs", "minBandwidthMbps"});
        if (auto it = rj.find("maxLatencyMs"); it != rj.end())
            c.required.maxLatencyMs = get_number(*it, ctx + ".required.maxLatencyMs");
        if (auto it = rj.find("minBandwidthMbps"); it != rj.end())
            c.required.minBandwidthMbps = get_number(*it, ctx + ".required.minBandwidthMbps");
        plan.connections.push_back(std::move(c));
    }

    if (auto it = j.find("warnings"); it != j.end()) {
        expect_array(*it, "plan.warnings");
        for (const auto& w : *it) {
            if (!w.is_string()) throw ParseError("plan.warnings: expected strings");
            plan.warnings.push_back(w.get<std::string>());
        }
    }

    // Structural invariants checkable without the problem inputs.
    std::set<std::string> serverIds;
    for (const auto& s : plan.servers)
        if (!serverIds.insert(s.serverId).second)
            throw ParseError("plan.servers: duplicate server id \"" + s.serverId + "\"");
    std::set<std::string> orderIds(plan.launchOrder.begin(), plan.launchOrder.end());
    if (orderIds.size() != plan.launchOrder.size() || orderIds != serverIds)
        throw ParseError("plan.launchOrder: not a permutation of the server ids");
    for (const auto& f : plan.dataFlows)
        if (!serverIds.count(f.producer) || !serverIds.count(f.consumer))
            throw ParseError("plan.dataFlows: flow \"" + f.connectionId +
                             "\" references an undeclared server");
    for (const auto& c : plan.connections) {
        if (!serverIds.count(c.sourceServer) || !serverIds.count(c.targetServer))
            throw ParseError("plan.connections: connection \"" + c.connectionId +
                             "\" references an undeclared server");
        if (!c.satisfied())
            throw ParseError("plan.connections: connection \"" + c.connectionId +
                             "\" does not satisfy its required bounds");
    }
    return plan;
}

} // namespace griddeploy
