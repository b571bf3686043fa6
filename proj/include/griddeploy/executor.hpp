#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "griddeploy/planner.hpp"

namespace griddeploy {

// ---------------------------------------------------------------------------
// Simulated grid-access middleware
// ---------------------------------------------------------------------------

enum class ProcState { Submitted, Running, Suspended, Cancelled, Failed };

inline const char* to_string(ProcState s) {
    switch (s) {
    case ProcState::Submitted: return "Submitted";
    case ProcState::Running: return "Running";
    case ProcState::Suspended: return "Suspended";
    case ProcState::Cancelled: return "Cancelled";
    case ProcState::Failed: return "Failed";
    }
    return "Failed";
}

inline ProcState proc_state_from_string(const std::string& s) {
    if (s == "Submitted") return ProcState::Submitted;
    if (s == "Running") return ProcState::Running;
    if (s == "Suspended") return ProcState::Suspended;
    if (s == "Cancelled") return ProcState::Cancelled;
    if (s == "Failed") return ProcState::Failed;
    throw ParseError("unknown process state \"" + s + "\"");
}

enum class LifecycleAction { Cancel, Suspend, Resume, Restart };

inline const char* to_string(LifecycleAction a) {
    switch (a) {
    case LifecycleAction::Cancel: return "cancel";
    case LifecycleAction::Suspend: return "suspend";
    case LifecycleAction::Resume: return "resume";
    case LifecycleAction::Restart: return "restart";
    }
    return "cancel";
}

inline LifecycleAction lifecycle_action_from_string(const std::string& s) {
    if (s == "cancel") return LifecycleAction::Cancel;
    if (s == "suspend") return LifecycleAction::Suspend;
    if (s == "resume") return LifecycleAction::Resume;
    if (s == "restart") return LifecycleAction::Restart;
    throw ParseError("unknown lifecycle action \"" + s + "\"");
}

// The full transition table; std::nullopt marks an illegal transition. The
// Submitted state is transient during deploy/restart and accepts no action.
inline std::optional<ProcState> lifecycle_transition(ProcState state, LifecycleAction action) {
    switch (action) {
    case LifecycleAction::Cancel:
        if (state == ProcState::Running || state == ProcState::Suspended)
            return ProcState::Cancelled;
        return std::nullopt;
    case LifecycleAction::Suspend:
        if (state == ProcState::Running) return ProcState::Suspended;
        return std::nullopt;
    case LifecycleAction::Resume:
        if (state == ProcState::Suspended) return ProcState::Running;
        return std::nullopt;
    case LifecycleAction::Restart:
        if (state == ProcState::Running || state == ProcState::Suspended ||
            state == ProcState::Cancelled || state == ProcState::Failed)
            return ProcState::Running;
        return std::nullopt;
    }
    return std::nullopt;
}

struct SimProcess {
    std::string serverId;
    std::string middlewareHandle;
    std::int64_t memoryMB = 0;
};

// In-process stand-in for the grid access middleware: tracks per-node free
// memory and running processes, and can be scripted to refuse submissions.
struct SimulatedGrid {
    std::map<std::string, std::int64_t> capacityMB;
    std::map<std::string, std::int64_t> remainingMB;
    std::map<std::string, std::map<std::string, SimProcess>> processes; // node -> server -> proc
    std::set<std::string> failNodes;
    std::int64_t nextJobId = 1;
};

inline SimulatedGrid make_grid(const GridCatalog& catalog) {
    SimulatedGrid grid;
    for (const auto& n : catalog.nodes_in_document_order()) {
        grid.capacityMB[n.id] = n.memoryMB;
        grid.remainingMB[n.id] = n.memoryMB;
    }
    return grid;
}

// Bootstrap job submission: the one middleware call that can start a process
// on a bare node. Returns the opaque middleware handle.
inline std::string submit_job(SimulatedGrid& grid, const std::string& nodeId,
                              const std::string& serverId, std::int64_t memoryMB) {
    auto free = grid.remainingMB.find(nodeId);
    if (free == grid.remainingMB.end()) throw LookupError("unknown node \"" + nodeId + "\"");
    if (grid.processes[nodeId].count(serverId))
        throw InvariantError("node \"" + nodeId + "\" already runs server \"" + serverId + "\"");
    if (grid.failNodes.count(nodeId))
        throw MiddlewareError("middleware rejected submission to node \"" + nodeId + "\"");
    if (free->second < memoryMB)
        throw CapacityError("node \"" + nodeId + "\" has " + std::to_string(free->second) +
                            " MB free but server \"" + serverId + "\" needs " +
                            std::to_string(memoryMB) + " MB");
    free->second -= memoryMB;
    std::string handle = "job-" + std::to_string(grid.nextJobId++);
    grid.processes[nodeId][serverId] = {serverId, handle, memoryMB};
    return handle;
}

// ---------------------------------------------------------------------------
// Session state
// ---------------------------------------------------------------------------

// Dual handles: the middleware job token from submission and the component
// reference minted at activation.
struct ExecutionHandle {
    std::string serverId;
    std::string nodeId;
    std::int64_t memoryMB = 0;
    std::string middlewareHandle; // empty when submission failed
    std::string componentRef;     // empty until first activation
    ProcState state = ProcState::Submitted;
    std::vector<std::string> boundNames;

    bool operator==(const ExecutionHandle&) const = default;
};

struct NameRegistry {
    std::map<std::string, std::string> bindings;

    void bind(const std::string& name, const std::string& ref) {
        if (!bindings.emplace(name, ref).second)
            throw InvariantError("name \"" + name + "\" is already bound");
    }

    void rebind(const std::string& name, const std::string& ref) { bindings[name] = ref; }

    const std::string& resolve(const std::string& name) const {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw LookupError("unknown name \"" + name + "\"");
        return it->second;
    }
};

struct Event {
    std::int64_t seq = 0;
    std::string type;
    std::string server;
    std::string detail;

    bool operator==(const Event&) const = default;
};

// Live deployment state. Single logical thread of control per session;
// distinct sessions over distinct grids may run concurrently.
struct ExecutionSession {
    SimulatedGrid grid;
    DeploymentPlan plan;
    std::map<std::string, ExecutionHandle> handles;
    NameRegistry registry;
    std::vector<Event> eventLog;
    std::string registryRef;
    std::int64_t nextSeq = 0;

    void log(std::string type, std::string server, std::string detail = "") {
        eventLog.push_back({nextSeq++, std::move(type), std::move(server), std::move(detail)});
    }
};

inline std::string component_ref(const std::string& nodeId, const std::string& serverId) {
    return "sim://" + nodeId + "/" + serverId;
}

namespace detail {

inline std::int64_t server_memory(const PlanningProblem& problem, const ServerPlacement& server) {
    std::int64_t total = 0;
    for (const auto& c : server.components) {
        const ComponentDecl* decl = problem.assembly.find_component(c.id);
        total += decl->implementations[c.implementationIndex].memoryMB;
    }
    return total;
}

// Staged bring-up after a successful submission: install, configure (handing
// over the registry reference), activate, then bind provided ports.
inline void activate_server(ExecutionSession& session, const PlanningProblem& problem,
                            const ServerPlacement& server, ExecutionHandle& handle,
                            bool rebinding) {
    session.log("install", server.serverId);
    session.log("configure", server.serverId,
                session.registryRef.empty() ? "" : "registry=" + session.registryRef);
    session.log("activate", server.serverId);
    handle.state = ProcState::Running;
    handle.componentRef = component_ref(server.nodeId, server.serverId);
    handle.boundNames.clear();
    for (const auto& c : server.components) {
        const ComponentDecl* decl = problem.assembly.find_component(c.id);
        for (const auto& port : decl->provides) {
            std::string name = c.id + "/" + port;
            if (rebinding) session.registry.rebind(name, handle.componentRef);
            else session.registry.bind(name, handle.componentRef);
            handle.boundNames.push_back(name);
            session.log("bind", server.serverId, name + " -> " + handle.componentRef);
        }
    }
    if (server.infrastructure && session.registryRef.empty()) {
        session.registryRef = handle.componentRef;
        session.log("registry-ready", server.serverId, handle.componentRef);
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Deploy
// ---------------------------------------------------------------------------

// Walks the launch order, bootstrapping every component server with a job
// submission and staging it to Running. Stops at the first submission failure,
// leaving earlier servers running.
inline ExecutionSession deploy(SimulatedGrid grid, const DeploymentPlan& plan,
                               const PlanningProblem& problem) {
    if (plan.problemDigest != problem_digest(problem))
        throw DigestMismatchError("plan digest " + plan.problemDigest +
                                  " does not match the provided assembly/catalog/goal");
    ValidationReport report = check_plan(problem, plan);
    if (!report.empty())
        throw PlanInvalidError("plan fails validation: " + report.findings.front().line());

    ExecutionSession session;
    session.grid = std::move(grid);
    session.plan = plan;

    for (const auto& serverId : plan.launchOrder) {
        const ServerPlacement& server = *plan.find_server(serverId);
        ExecutionHandle handle;
        handle.serverId = serverId;
        handle.nodeId = server.nodeId;
        handle.memoryMB = detail::server_memory(problem, server);
        try {
            handle.middlewareHandle =
                submit_job(session.grid, server.nodeId, serverId, handle.memoryMB);
        } catch (const Error& e) {
            handle.state = ProcState::Failed;
            session.handles[serverId] = std::move(handle);
            session.log("submit-failed", serverId, e.what());
            break;
        }
        handle.state = ProcState::Submitted;
        session.log("submit", serverId, "node=" + server.nodeId + " job=" + handle.middlewareHandle);
        detail::activate_server(session, problem, server, handle, false);
        session.handles[serverId] = std::move(handle);

        // Reference passing: a data flow is honored once both ends run.
        for (const auto& flow : plan.dataFlows) {
            const ExecutionHandle* producer = nullptr;
            const ExecutionHandle* consumer = nullptr;
            if (auto it = session.handles.find(flow.producer); it != session.handles.end())
                producer = &it->second;
            if (auto it = session.handles.find(flow.consumer); it != session.handles.end())
                consumer = &it->second;
            bool involvesThis = flow.producer == serverId || flow.consumer == serverId;
            if (!involvesThis || !producer || !consumer) continue;
            if (producer->state != ProcState::Running || consumer->state != ProcState::Running)
                continue;
            session.log("flow", flow.consumer,
                        flow.connectionId + ": " + producer->componentRef + " -> " + flow.consumer);
        }
    }
    return session;
}

// ---------------------------------------------------------------------------
// Lifecycle control
// ---------------------------------------------------------------------------

// Applies one lifecycle action to one server, per the transition table.
// Restart releases and re-books memory, mints a fresh middleware handle, and
// rebinds the same registry names to the re-minted reference.
inline const ExecutionHandle& lifecycle(ExecutionSession& session, const std::string& serverId,
                                        LifecycleAction action) {
    auto it = session.handles.find(serverId);
    if (it == session.handles.end())
        throw LookupError("unknown server \"" + serverId + "\"");
    ExecutionHandle& handle = it->second;

    auto next = lifecycle_transition(handle.state, action);
    if (!next)
        throw TransitionError(std::string(to_string(action)) + " is illegal in state " +
                              to_string(handle.state) + " for server \"" + serverId + "\"");

    auto release = [&] {
        session.grid.remainingMB[handle.nodeId] += handle.memoryMB;
        session.grid.processes[handle.nodeId].erase(serverId);
    };

    switch (action) {
    case LifecycleAction::Suspend:
        handle.state = ProcState::Suspended;
        session.log("suspend", serverId);
        break;
    case LifecycleAction::Resume:
        handle.state = ProcState::Running;
        session.log("resume", serverId);
        break;
    case LifecycleAction::Cancel:
        release();
        handle.state = ProcState::Cancelled;
        session.log("cancel", serverId);
        break;
    case LifecycleAction::Restart: {
        if (handle.state == ProcState::Running || handle.state == ProcState::Suspended) release();
        session.log("restart", serverId);
        try {
            handle.middlewareHandle =
                submit_job(session.grid, handle.nodeId, serverId, handle.memoryMB);
        } catch (const Error& e) {
            handle.middlewareHandle.clear();
            handle.state = ProcState::Failed;
            session.log("submit-failed", serverId, e.what());
            return handle;
        }
        handle.state = ProcState::Submitted;
        session.log("submit", serverId, "node=" + handle.nodeId + " job=" + handle.middlewareHandle);
        session.log("install", serverId);
        session.log("configure", serverId,
                    session.registryRef.empty() ? "" : "registry=" + session.registryRef);
        session.log("activate", serverId);
        handle.state = ProcState::Running;
        handle.componentRef = component_ref(handle.nodeId, serverId);
        for (const auto& name : handle.boundNames) {
            session.registry.rebind(name, handle.componentRef);
            session.log("bind", serverId, name + " -> " + handle.componentRef);
        }
        break;
    }
    }
    return handle;
}

inline const std::string& resolve(const ExecutionSession& session, const std::string& name) {
    return session.registry.resolve(name);
}

// ---------------------------------------------------------------------------
// Session snapshot
// ---------------------------------------------------------------------------

inline json session_to_json(const ExecutionSession& session) {
    json handles = json::array();
    for (const auto& [id, h] : session.handles) {
        handles.push_back(json{{"serverId", h.serverId},
                               {"nodeId", h.nodeId},
                               {"memoryMB", h.memoryMB},
                               {"middlewareHandle", h.middlewareHandle},
                               {"componentRef", h.componentRef},
                               {"state", to_string(h.state)},
                               {"boundNames", h.boundNames}});
    }
    json bindings = json::object();
    for (const auto& [name, ref] : session.registry.bindings) bindings[name] = ref;
    json events = json::array();
    for (const auto& e : session.eventLog)
        events.push_back(json{{"seq", e.seq}, {"event", e.type}, {"server", e.server},
                              {"detail", e.detail}});
    json ledger = json::object();
    for (const auto& [node, freeMB] : session.grid.remainingMB) ledger[node] = freeMB;
    return json{{"formatVersion", 1},
                {"handles", std::move(handles)},
                {"bindings", std::move(bindings)},
                {"eventLog", std::move(events)},
                {"ledger", std::move(ledger)},
                {"registryRef", session.registryRef},
                {"nextJobId", session.grid.nextJobId},
                {"nextSeq", session.nextSeq}};
}

inline std::string serialize_session(const ExecutionSession& session) {
    return session_to_json(session).dump(2) + "\n";
}

// Rebuilds a controllable session from a snapshot: the memory ledger and the
// live process table come back from the handles, so lifecycle actions can run
// without re-reading plan or catalog.
inline ExecutionSession deserialize_session(std::string_view text) {
    json j = parse_json_document(text);
    expect_object(j, "session");
    check_keys(j, "session", {"formatVersion", "handles", "bindings", "eventLog", "ledger",
                              "registryRef", "nextJobId", "nextSeq"});
    require_format_version(j, "session");

    ExecutionSession session;
    const json& handles = get_member(j, "handles", "session");
    expect_array(handles, "session.handles");
    for (std::size_t i = 0; i < handles.size(); ++i) {
        std::string ctx = "handles[" + std::to_string(i) + "]";
        const json& hj = handles[i];
        expect_object(hj, ctx);
        check_keys(hj, ctx, {"serverId", "nodeId", "memoryMB", "middlewareHandle", "componentRef",
                             "state", "boundNames"});
        ExecutionHandle h;
        h.serverId = get_string(hj, "serverId", ctx);
        h.nodeId = get_string(hj, "nodeId", ctx);
        h.memoryMB = get_int(hj, "memoryMB", ctx);
        h.middlewareHandle = get_string(hj, "middlewareHandle", ctx);
        h.componentRef = get_string(hj, "componentRef", ctx);
        h.state = proc_state_from_string(get_string(hj, "state", ctx));
        if (auto it = hj.find("boundNames"); it != hj.end()) {
            expect_array(*it, ctx + ".boundNames");
            for (const auto& n : *it) {
                if (!n.is_string()) throw ParseError(ctx + ".boundNames: expected strings");
                h.boundNames.push_back(n.get<std::string>());
            }
        }
        session.handles[h.serverId] = std::move(h);
    }

    const json& bindings = get_member(j, "bindings", "session");
    expect_object(bindings, "session.bindings");
    for (auto it = bindings.begin(); it != bindings.end(); ++it) {
        if (!it.value().is_string()) throw ParseError("session.bindings: expected strings");
        session.registry.bindings[it.key()] = it.value().get<std::string>();
    }

    const json& events = get_member(j, "eventLog", "session");
    expect_array(events, "session.eventLog");
    for (std::size_t i = 0; i < events.size(); ++i) {
        std::string ctx = "eventLog[" + std::to_string(i) + "]";
        const json& ej = events[i];
        expect_object(ej, ctx);
        check_keys(ej, ctx, {"seq", "event", "server", "detail"});
        session.eventLog.push_back({get_int(ej, "seq", ctx), get_string(ej, "event", ctx),
                                    get_string(ej, "server", ctx), get_string(ej, "detail", ctx)});
    }

    const json& ledger = get_member(j, "ledger", "session");
    expect_object(ledger, "session.ledger");
    for (auto it = ledger.begin(); it != ledger.end(); ++it) {
        if (!it.value().is_number_integer())
            throw ParseError("session.ledger: expected integers");
        session.grid.remainingMB[it.key()] = it.value().get<std::int64_t>();
    }

    session.registryRef = get_string(j, "registryRef", "session");
    session.grid.nextJobId = get_int(j, "nextJobId", "session");
    session.nextSeq = get_int(j, "nextSeq", "session");

    for (const auto& [id, h] : session.handles) {
        if (h.state == ProcState::Submitted || h.state == ProcState::Running ||
            h.state == ProcState::Suspended)
            session.grid.processes[h.nodeId][id] = {id, h.middlewareHandle, h.memoryMB};
    }
    return session;
}

} // namespace griddeploy
