#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "griddeploy/errors.hpp"
#include "griddeploy/json_util.hpp"
#include "griddeploy/validation.hpp"

namespace griddeploy {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct ImplementationAlternative {
    std::string arch;
    std::string os;
    std::int64_t memoryMB = 0;
    std::vector<std::string> dependencies; // carried, never interpreted

    bool operator==(const ImplementationAlternative&) const = default;
};

struct ComponentDecl {
    std::string id;
    bool infrastructure = false; // registry-like process, launched first
    std::vector<ImplementationAlternative> implementations;
    std::vector<std::string> provides;
    std::vector<std::string> uses;

    bool operator==(const ComponentDecl&) const = default;
};

struct Endpoint {
    std::string component;
    std::string port;

    bool operator==(const Endpoint&) const = default;
};

struct Connection {
    std::string id;
    Endpoint from; // producer side
    Endpoint to;   // consumer side
    std::optional<double> maxLatencyMs;
    std::optional<double> minBandwidthMbps;

    bool has_requirement() const { return maxLatencyMs.has_value() || minBandwidthMbps.has_value(); }
    bool operator==(const Connection&) const = default;
};

enum class CollocationKind { Process, Host };

inline const char* to_string(CollocationKind k) {
    return k == CollocationKind::Process ? "process" : "host";
}

struct CollocationGroup {
    CollocationKind kind = CollocationKind::Process;
    std::vector<std::string> members;

    bool operator==(const CollocationGroup&) const = default;
};

enum class Objective { None, MinimizeWorstLatency, MinimizeTotalLatency, MaximizeMinBandwidth };

inline const char* to_string(Objective o) {
    switch (o) {
    case Objective::None: return "none";
    case Objective::MinimizeWorstLatency: return "minimize-worst-latency";
    case Objective::MinimizeTotalLatency: return "minimize-total-latency";
    case Objective::MaximizeMinBandwidth: return "maximize-min-bandwidth";
    }
    return "none";
}

inline Objective objective_from_string(const std::string& s, const std::string& ctx) {
    if (s == "none") return Objective::None;
    if (s == "minimize-worst-latency") return Objective::MinimizeWorstLatency;
    if (s == "minimize-total-latency") return Objective::MinimizeTotalLatency;
    if (s == "maximize-min-bandwidth") return Objective::MaximizeMinBandwidth;
    throw ParseError(ctx + ": unknown objective \"" + s + "\"");
}

struct UserGoal {
    Objective objective = Objective::None;
    std::map<std::string, std::string> pins; // component id -> site (group) id

    bool operator==(const UserGoal&) const = default;
};

struct ComponentAssembly {
    std::string name;
    std::vector<ComponentDecl> components;
    std::vector<Connection> connections;
    std::vector<CollocationGroup> collocations;
    std::optional<UserGoal> goal;

    const ComponentDecl* find_component(std::string_view id) const {
        for (const auto& c : components)
            if (c.id == id) return &c;
        return nullptr;
    }

    bool operator==(const ComponentAssembly&) const = default;
};

// arch/os matching is exact case-insensitive token equality.
inline std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool platform_matches(const ImplementationAlternative& impl,
                             std::string_view arch, std::string_view os) {
    return ascii_lower(impl.arch) == ascii_lower(arch) && ascii_lower(impl.os) == ascii_lower(os);
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

inline json goal_to_json(const UserGoal& goal) {
    json pins = json::object();
    for (const auto& [component, site] : goal.pins) pins[component] = site;
    return json{{"objective", to_string(goal.objective)}, {"pins", pins}};
}

inline UserGoal goal_from_json(const json& j, const std::string& ctx) {
    expect_object(j, ctx);
    check_keys(j, ctx, {"objective", "pins"});
    UserGoal goal;
    goal.objective = objective_from_string(get_string(j, "objective", ctx), ctx);
    if (auto it = j.find("pins"); it != j.end()) {
        expect_object(*it, ctx + ".pins");
        for (auto p = it->begin(); p != it->end(); ++p) {
            if (!p.value().is_string())
                throw ParseError(ctx + ".pins." + p.key() + ": expected a group id string");
            goal.pins[p.key()] = p.value().get<std::string>();
        }
    }
    return goal;
}

// Standalone goal file: the same object wrapped with a formatVersion.
inline UserGoal parse_goal_file(std::string_view text) {
    json j = parse_json_document(text);
    expect_object(j, "goal");
    check_keys(j, "goal", {"formatVersion", "objective", "pins"});
    require_format_version(j, "goal");
    json inner = json::object();
    inner["objective"] = get_member(j, "objective", "goal");
    if (auto it = j.find("pins"); it != j.end()) inner["pins"] = *it;
    return goal_from_json(inner, "goal");
}

inline json assembly_to_json(const ComponentAssembly& a) {
    json components = json::array();
    for (const auto& c : a.components) {
        json impls = json::array();
        for (const auto& impl : c.implementations) {
            json ij{{"arch", impl.arch}, {"os", impl.os}, {"memoryMB", impl.memoryMB}};
            if (!impl.dependencies.empty()) ij["dependencies"] = impl.dependencies;
            impls.push_back(std::move(ij));
        }
        json cj{{"id", c.id}, {"implementations", std::move(impls)},
                {"provides", c.provides}, {"uses", c.uses}};
        if (c.infrastructure) cj["infrastructure"] = true;
        components.push_back(std::move(cj));
    }

    json connections = json::array();
    for (const auto& conn : a.connections) {
        json cj{{"id", conn.id},
                {"from", {{"component", conn.from.component}, {"port", conn.from.port}}},
                {"to", {{"component", conn.to.component}, {"port", conn.to.port}}}};
        if (conn.maxLatencyMs) cj["maxLatencyMs"] = *conn.maxLatencyMs;
        if (conn.minBandwidthMbps) cj["minBandwidthMbps"] = *conn.minBandwidthMbps;
        connections.push_back(std::move(cj));
    }

    json collocations = json::array();
    for (const auto& g : a.collocations)
        collocations.push_back(json{{"kind", to_string(g.kind)}, {"members", g.members}});

    json j{{"formatVersion", 1},
           {"name", a.name},
           {"components", std::move(components)},
           {"connections", std::move(connections)},
           {"collocations", std::move(collocations)}};
    if (a.goal) j["goal"] = goal_to_json(*a.goal);
    return j;
}

inline std::string serialize_assembly(const ComponentAssembly& a) {
    return assembly_to_json(a).dump(2) + "\n";
}

// Schema-level read: document structure is enforced, value invariants are not.
// validate_assembly() turns invariant breaches into findings.
inline ComponentAssembly assembly_from_json(const json& j) {
    expect_object(j, "assembly");
    check_keys(j, "assembly", {"formatVersion", "name", "components", "connections",
                               "collocations", "goal"});
    require_format_version(j, "assembly");

    ComponentAssembly a;
    a.name = get_string(j, "name", "assembly");

    const json& comps = get_member(j, "components", "assembly");
    expect_array(comps, "assembly.components");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        std::string ctx = "components[" + std::to_string(i) + "]";
        const json& cj = comps[i];
        expect_object(cj, ctx);
        check_keys(cj, ctx, {"id", "infrastructure", "implementations", "provides", "uses"});
        ComponentDecl c;
        c.id = get_string(cj, "id", ctx);
        c.infrastructure = get_bool_or(cj, "infrastructure", false, ctx);
        const json& impls = get_member(cj, "implementations", ctx);
        expect_array(impls, ctx + ".implementations");
        for (std::size_t k = 0; k < impls.size(); ++k) {
            std::string ictx = ctx + ".implementations[" + std::to_string(k) + "]";
            const json& ij = impls[k];
            expect_object(ij, ictx);
            check_keys(ij, ictx, {"arch", "os", "memoryMB", "dependencies"});
            ImplementationAlternative impl;
            impl.arch = get_string(ij, "arch", ictx);
            impl.os = get_string(ij, "os", ictx);
            impl.memoryMB = get_int(ij, "memoryMB", ictx);
            if (auto it = ij.find("dependencies"); it != ij.end()) {
                expect_array(*it, ictx + ".dependencies");
                for (const auto& d : *it) {
                    if (!d.is_string()) throw ParseError(ictx + ".dependencies: expected strings");
                    impl.dependencies.push_back(d.get<std::string>());
                }
            }
            c.implementations.push_back(std::move(impl));
        }
        for (const char* key : {"provides", "uses"}) {
            if (auto it = cj.find(key); it != cj.end()) {
                expect_array(*it, ctx + "." + key);
                for (const auto& p : *it) {
                    if (!p.is_string()) throw ParseError(ctx + "." + key + ": expected strings");
                    (key == std::string_view("provides") ? c.provides : c.uses)
                        .push_back(p.get<std::string>());
                }
            }
        }
        a.components.push_back(std::move(c));
    }

    if (auto it = j.find("connections"); it != j.end()) {
        expect_array(*it, "assembly.connections");
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string ctx = "connections[" + std::to_string(i) + "]";
            const json& cj = (*it)[i];
            expect_object(cj, ctx);
            check_keys(cj, ctx, {"id", "from", "to", "maxLatencyMs", "minBandwidthMbps"});
            Connection conn;
            conn.id = get_string(cj, "id", ctx);
            for (const char* side : {"from", "to"}) {
                const json& ej = get_member(cj, side, ctx);
                std::string ectx = ctx + "." + side;
                expect_object(ej, ectx);
                check_keys(ej, ectx, {"component", "port"});
                Endpoint ep{get_string(ej, "component", ectx), get_string(ej, "port", ectx)};
                (side == std::string_view("from") ? conn.from : conn.to) = std::move(ep);
            }
            if (auto b = cj.find("maxLatencyMs"); b != cj.end())
                conn.maxLatencyMs = get_number(*b, ctx + ".maxLatencyMs");
            if (auto b = cj.find("minBandwidthMbps"); b != cj.end())
                conn.minBandwidthMbps = get_number(*b, ctx + ".minBandwidthMbps");
            a.connections.push_back(std::move(conn));
        }
    }

    if (auto it = j.find("collocations"); it != j.end()) {
        expect_array(*it, "assembly.collocations");
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string ctx = "collocations[" + std::to_string(i) + "]";
            const json& gj = (*it)[i];
            expect_object(gj, ctx);
            check_keys(gj, ctx, {"kind", "members"});
            CollocationGroup g;
            std::string kind = get_string(gj, "kind", ctx);
            if (kind == "process") g.kind = CollocationKind::Process;
            else if (kind == "host") g.kind = CollocationKind::Host;
            else throw ParseError(ctx + ": kind must be \"process\" or \"host\"");
            const json& members = get_member(gj, "members", ctx);
            expect_array(members, ctx + ".members");
            for (const auto& m : members) {
                if (!m.is_string()) throw ParseError(ctx + ".members: expected strings");
                g.members.push_back(m.get<std::string>());
            }
            a.collocations.push_back(std::move(g));
        }
    }

    if (auto it = j.find("goal"); it != j.end()) a.goal = goal_from_json(*it, "assembly.goal");
    return a;
}

// Structural read without invariant enforcement; feeds validate_assembly.
inline ComponentAssembly parse_assembly_unchecked(std::string_view text) {
    return assembly_from_json(parse_json_document(text));
}

// ---------------------------------------------------------------------------
// Collocation normalization
// ---------------------------------------------------------------------------

struct GroupAssignment {
    std::string processGroup;
    std::string hostGroup;

    bool operator==(const GroupAssignment&) const = default;
};

// Every component resolved to exactly one process group and one host group.
// Group ids are the lexicographically smallest member id.
struct CollocationPartition {
    std::map<std::string, GroupAssignment> byComponent;

    bool operator==(const CollocationPartition&) const = default;

    std::map<std::string, std::vector<std::string>> process_groups() const {
        return collect(&GroupAssignment::processGroup);
    }

    std::map<std::string, std::vector<std::string>> host_groups() const {
        return collect(&GroupAssignment::hostGroup);
    }

    // Process groups contained in one host group, by id.
    std::map<std::string, std::vector<std::string>> process_groups_of_host() const {
        std::map<std::string, std::set<std::string>> acc;
        for (const auto& [comp, ga] : byComponent) acc[ga.hostGroup].insert(ga.processGroup);
        std::map<std::string, std::vector<std::string>> out;
        for (const auto& [host, procs] : acc) out[host] = {procs.begin(), procs.end()};
        return out;
    }

private:
    std::map<std::string, std::vector<std::string>> collect(
        std::string GroupAssignment::* field) const {
        std::map<std::string, std::vector<std::string>> out;
        for (const auto& [comp, ga] : byComponent) out[ga.*field].push_back(comp);
        return out;
    }
};

namespace detail {

class UnionFind {
public:
    void ensure(const std::string& x) {
        parent_.try_emplace(x, x);
    }

    const std::string& find(const std::string& x) {
        ensure(x);
        std::string& p = parent_[x];
        if (p == x) return parent_.find(x)->first;
        const std::string& root = find(p);
        p = root;
        return root;
    }

    void unite(const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra == rb) return;
        // Keep the lexicographically smallest id as the class representative.
        if (rb < ra) std::swap(ra, rb);
        parent_[rb] = ra;
    }

private:
    std::map<std::string, std::string> parent_;
};

} // namespace detail

// Process collocation implies host collocation; host groups are the connected
// components of host-kind groups unioned with the derived process groups.
inline CollocationPartition normalize_collocation(const ComponentAssembly& a) {
    detail::UnionFind process, host;
    for (const auto& c : a.components) {
        process.ensure(c.id);
        host.ensure(c.id);
    }
    for (const auto& g : a.collocations) {
        if (g.members.empty()) continue;
        const std::string& first = g.members.front();
        for (const auto& m : g.members) {
            if (g.kind == CollocationKind::Process) process.unite(first, m);
            host.unite(first, m);
        }
    }

    CollocationPartition part;
    for (const auto& c : a.components)
        part.byComponent[c.id] = {process.find(c.id), host.find(c.id)};

    // A process hosts one binary per platform: every pair sharing a process
    // group must agree on at least one (arch, os).
    for (const auto& [groupId, members] : part.process_groups()) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t k = i + 1; k < members.size(); ++k) {
                const ComponentDecl* ci = a.find_component(members[i]);
                const ComponentDecl* ck = a.find_component(members[k]);
                if (!ci || !ck) continue;
                bool shared = false;
                for (const auto& ii : ci->implementations) {
                    for (const auto& ik : ck->implementations) {
                        if (platform_matches(ii, ik.arch, ik.os)) {
                            shared = true;
                            break;
                        }
                    }
                    if (shared) break;
                }
                if (!shared)
                    throw ContradictionError(
                        groupId, "components \"" + members[i] + "\" and \"" + members[k] +
                                     "\" share process group \"" + groupId +
                                     "\" but have no common (arch, os) implementation");
            }
        }
    }
    return part;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace finding_code {
inline constexpr const char* kDuplicateId = "DUPLICATE_ID";
inline constexpr const char* kDuplicatePort = "DUPLICATE_PORT";
inline constexpr const char* kDuplicateMember = "DUPLICATE_MEMBER";
inline constexpr const char* kNoImplementation = "NO_IMPLEMENTATION";
inline constexpr const char* kNegativeMemory = "NEGATIVE_MEMORY";
inline constexpr const char* kInvalidBound = "INVALID_BOUND";
inline constexpr const char* kDanglingReference = "DANGLING_REFERENCE";
inline constexpr const char* kSelfConnectionRequirement = "SELF_CONNECTION_REQUIREMENT";
inline constexpr const char* kCollocationTooSmall = "COLLOCATION_TOO_SMALL";
inline constexpr const char* kProcessGroupOverlap = "PROCESS_GROUP_OVERLAP";
inline constexpr const char* kCollocationContradiction = "COLLOCATION_CONTRADICTION";
} // namespace finding_code

inline ValidationReport validate_assembly(const ComponentAssembly& a) {
    namespace fc = finding_code;
    ValidationReport report;

    std::set<std::string> componentIds;
    std::set<std::string> duplicateComponents;
    for (const auto& c : a.components) {
        if (!componentIds.insert(c.id).second && duplicateComponents.insert(c.id).second)
            report.add(Severity::Error, fc::kDuplicateId, c.id,
                       "component id declared more than once");
    }

    for (const auto& c : a.components) {
        if (c.implementations.empty())
            report.add(Severity::Error, fc::kNoImplementation, c.id,
                       "component declares no implementation alternative");
        for (std::size_t i = 0; i < c.implementations.size(); ++i) {
            if (c.implementations[i].memoryMB < 0)
                report.add(Severity::Error, fc::kNegativeMemory, c.id,
                           "implementation " + std::to_string(i) + " has negative memoryMB");
        }
        std::set<std::string> ports;
        std::set<std::string> reported;
        for (const auto& lists : {c.provides, c.uses}) {
            for (const auto& p : lists) {
                if (!ports.insert(p).second && reported.insert(p).second)
                    report.add(Severity::Error, fc::kDuplicatePort, c.id,
                               "port \"" + p + "\" declared more than once");
            }
        }
    }

    auto hasPort = [&](const ComponentDecl& c, const std::string& port) {
        for (const auto& lists : {c.provides, c.uses})
            for (const auto& p : lists)
                if (p == port) return true;
        return false;
    };

    std::set<std::string> connectionIds;
    std::set<std::string> duplicateConnections;
    for (const auto& conn : a.connections) {
        if (!connectionIds.insert(conn.id).second && duplicateConnections.insert(conn.id).second)
            report.add(Severity::Error, fc::kDuplicateId, conn.id,
                       "connection id declared more than once");
        for (const Endpoint* ep : {&conn.from, &conn.to}) {
            const ComponentDecl* c = a.find_component(ep->component);
            if (!c) {
                report.add(Severity::Error, fc::kDanglingReference, conn.id,
                           "connection references unknown component \"" + ep->component + "\"");
            } else if (!hasPort(*c, ep->port)) {
                report.add(Severity::Error, fc::kDanglingReference, conn.id,
                           "connection references unknown port \"" + ep->component + "/" +
                               ep->port + "\"");
            }
        }
        if (conn.maxLatencyMs && *conn.maxLatencyMs < 0)
            report.add(Severity::Error, fc::kInvalidBound, conn.id, "maxLatencyMs must be >= 0");
        if (conn.minBandwidthMbps && *conn.minBandwidthMbps <= 0)
            report.add(Severity::Error, fc::kInvalidBound, conn.id, "minBandwidthMbps must be > 0");
        if (conn.from.component == conn.to.component && conn.has_requirement())
            report.add(Severity::Error, fc::kSelfConnectionRequirement, conn.id,
                       "intra-component connection must not carry network requirements");
    }

    bool collocationsSound = true;
    std::map<std::string, int> processMembership;
    for (std::size_t i = 0; i < a.collocations.size(); ++i) {
        const auto& g = a.collocations[i];
        std::string subject = g.members.empty() ? ("collocations[" + std::to_string(i) + "]")
                                                : g.members.front();
        if (g.members.size() < 2) {
            report.add(Severity::Error, fc::kCollocationTooSmall, subject,
                       "collocation group needs at least 2 members");
            collocationsSound = false;
        }
        std::set<std::string> seen;
        for (const auto& m : g.members) {
            if (!seen.insert(m).second) {
                report.add(Severity::Error, fc::kDuplicateMember, m,
                           "component listed twice in one collocation group");
                collocationsSound = false;
            }
            if (!a.find_component(m)) {
                report.add(Severity::Error, fc::kDanglingReference, m,
                           "collocation group references unknown component \"" + m + "\"");
                collocationsSound = false;
            }
            if (g.kind == CollocationKind::Process && ++processMembership[m] == 2) {
                report.add(Severity::Error, fc::kProcessGroupOverlap, m,
                           "component belongs to more than one process collocation group");
                collocationsSound = false;
            }
        }
    }

    if (collocationsSound && duplicateComponents.empty()) {
        try {
            normalize_collocation(a);
        } catch (const ContradictionError& e) {
            report.add(Severity::Error, fc::kCollocationContradiction, e.group_id(), e.what());
        }
    }

    report.sort_canonical();
    return report;
}

// Thrown by parse_assembly when a structurally well-formed document violates
// assembly invariants; carries the full report.
class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report)
        : Error(report.findings.empty() ? "validation failed" : report.findings.front().line()),
          report_(std::move(report)) {}

    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

inline ComponentAssembly parse_assembly(std::string_view text) {
    ComponentAssembly a = parse_assembly_unchecked(text);
    ValidationReport report = validate_assembly(a);
    if (report.has_errors()) throw ValidationError(std::move(report));
    return a;
}

} // namespace griddeploy
