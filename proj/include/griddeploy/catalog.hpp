#pragma once

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "griddeploy/errors.hpp"
#include "griddeploy/json_util.hpp"

namespace griddeploy {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

inline constexpr double kUnboundedBandwidth = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double bandwidthMbps) { return std::isinf(bandwidthMbps); }

struct LinkMetrics {
    double latencyMs = 0.0;
    double bandwidthMbps = kUnboundedBandwidth;

    bool operator==(const LinkMetrics&) const = default;
};

struct ComputeNode {
    std::string id;
    std::string arch;
    std::string os;
    std::int64_t cpuCount = 1;
    std::int64_t cpuSpeedMHz = 1;
    std::int64_t memoryMB = 1;
    std::int64_t storageGB = 0;

    bool operator==(const ComputeNode&) const = default;
};

// A site or sub-site: the internal edge connects any two direct members, the
// uplink edge connects the group to its parent.
struct NetworkGroup {
    std::string id;
    LinkMetrics internal;
    std::optional<LinkMetrics> uplink; // absent iff root
    std::vector<NetworkGroup> groups;
    std::vector<ComputeNode> nodes;

    bool operator==(const NetworkGroup&) const = default;
};

struct GridCatalog {
    NetworkGroup root;

    bool operator==(const GridCatalog& other) const { return root == other.root; }

    // Derived lookup structures; rebuilt after any change to root.
    void rebuild_index();

    const ComputeNode& node(std::string_view id) const {
        auto it = nodeIndex_.find(std::string(id));
        if (it == nodeIndex_.end())
            throw LookupError("unknown node \"" + std::string(id) + "\"");
        return flatNodes_[it->second];
    }

    bool has_node(std::string_view id) const {
        return nodeIndex_.count(std::string(id)) != 0;
    }

    bool has_group(std::string_view id) const {
        return groupDepth_.count(std::string(id)) != 0;
    }

    // All compute nodes in document order (preorder; child groups before a
    // group's own nodes, matching canonical key order).
    const std::vector<ComputeNode>& nodes_in_document_order() const { return flatNodes_; }

    int node_order(std::string_view id) const {
        auto it = nodeIndex_.find(std::string(id));
        if (it == nodeIndex_.end())
            throw LookupError("unknown node \"" + std::string(id) + "\"");
        return int(it->second);
    }

    bool node_in_group(std::string_view nodeId, std::string_view groupId) const {
        auto it = nodeIndex_.find(std::string(nodeId));
        if (it == nodeIndex_.end())
            throw LookupError("unknown node \"" + std::string(nodeId) + "\"");
        for (const auto& step : chains_[it->second])
            if (step.groupId == groupId) return true;
        return false;
    }

    struct ChainStep {
        std::string groupId;
        LinkMetrics internal;
        std::optional<LinkMetrics> uplink;
    };

    // Group chain from the root down to the node's containing group.
    const std::vector<ChainStep>& chain_of(std::string_view nodeId) const {
        auto it = nodeIndex_.find(std::string(nodeId));
        if (it == nodeIndex_.end())
            throw LookupError("unknown node \"" + std::string(nodeId) + "\"");
        return chains_[it->second];
    }

private:
    void index_group(const NetworkGroup& g, std::vector<ChainStep>& chain, int depth);

    std::vector<ComputeNode> flatNodes_;
    std::map<std::string, std::size_t> nodeIndex_;
    std::map<std::string, int> groupDepth_;
    std::vector<std::vector<ChainStep>> chains_; // parallel to flatNodes_
};

inline void GridCatalog::index_group(const NetworkGroup& g, std::vector<ChainStep>& chain,
                                     int depth) {
    groupDepth_[g.id] = depth;
    chain.push_back({g.id, g.internal, g.uplink});
    for (const auto& child : g.groups) index_group(child, chain, depth + 1);
    for (const auto& n : g.nodes) {
        nodeIndex_[n.id] = flatNodes_.size();
        flatNodes_.push_back(n);
        chains_.push_back(chain);
    }
    chain.pop_back();
}

inline void GridCatalog::rebuild_index() {
    flatNodes_.clear();
    nodeIndex_.clear();
    groupDepth_.clear();
    chains_.clear();
    std::vector<ChainStep> chain;
    index_group(root, chain, 0);
}

// ---------------------------------------------------------------------------
// Locator and fetcher
// ---------------------------------------------------------------------------

enum class LocatorScheme { File };

// Pointer to a resource information source. Only local files are wired up;
// this is the seam where URL or directory-service fetchers would plug in.
struct CatalogLocator {
    LocatorScheme scheme = LocatorScheme::File;
    std::string path;

    static CatalogLocator file(std::string path) {
        if (path.empty()) throw InvariantError("catalog locator path must not be empty");
        return {LocatorScheme::File, std::move(path)};
    }

    // Accepts "file:<path>" or a bare path; any other scheme is unsupported.
    static CatalogLocator from_string(const std::string& text) {
        auto colon = text.find(':');
        if (colon != std::string::npos && colon > 0) {
            std::string scheme = text.substr(0, colon);
            bool schemeLike = true;
            for (char c : scheme)
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' &&
                    c != '.')
                    schemeLike = false;
            if (schemeLike) {
                if (scheme == "file") return file(text.substr(colon + 1));
                throw ParseError("unsupported catalog locator scheme \"" + scheme + "\"");
            }
        }
        return file(text);
    }
};

inline std::string fetch_catalog(const CatalogLocator& locator) {
    std::ifstream in(locator.path, std::ios::binary);
    if (!in) throw IoError("cannot read catalog file \"" + locator.path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("I/O failure while reading \"" + locator.path + "\"");
    return buf.str();
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

inline json link_metrics_to_json(const LinkMetrics& m) {
    json j{{"latencyMs", m.latencyMs}};
    if (is_unbounded(m.bandwidthMbps)) j["bandwidthMbps"] = "unbounded";
    else j["bandwidthMbps"] = m.bandwidthMbps;
    return j;
}

inline LinkMetrics link_metrics_from_json(const json& j, const std::string& ctx) {
    expect_object(j, ctx);
    check_keys(j, ctx, {"latencyMs", "bandwidthMbps"});
    LinkMetrics m;
    m.latencyMs = get_number(get_member(j, "latencyMs", ctx), ctx + ".latencyMs");
    const json& bw = get_member(j, "bandwidthMbps", ctx);
    if (bw.is_string()) {
        if (bw.get<std::string>() != "unbounded")
            throw ParseError(ctx + ".bandwidthMbps: expected a number or \"unbounded\"");
        m.bandwidthMbps = kUnboundedBandwidth;
    } else {
        m.bandwidthMbps = get_number(bw, ctx + ".bandwidthMbps");
    }
    if (m.latencyMs < 0) throw ParseError(ctx + ".latencyMs: must be >= 0");
    if (!(m.bandwidthMbps > 0)) throw ParseError(ctx + ".bandwidthMbps: must be > 0");
    return m;
}

namespace detail {

inline json group_to_json(const NetworkGroup& g) {
    json groups = json::array();
    for (const auto& child : g.groups) groups.push_back(group_to_json(child));
    json nodes = json::array();
    for (const auto& n : g.nodes) {
        nodes.push_back(json{{"id", n.id},
                             {"arch", n.arch},
                             {"os", n.os},
                             {"cpuCount", n.cpuCount},
                             {"cpuSpeedMHz", n.cpuSpeedMHz},
                             {"memoryMB", n.memoryMB},
                             {"storageGB", n.storageGB}});
    }
    json j{{"id", g.id},
           {"internal", link_metrics_to_json(g.internal)},
           {"groups", std::move(groups)},
           {"nodes", std::move(nodes)}};
    if (g.uplink) j["uplink"] = link_metrics_to_json(*g.uplink);
    return j;
}

inline NetworkGroup group_from_json(const json& j, const std::string& ctx, bool isRoot,
                                    std::set<std::string>& groupIds,
                                    std::set<std::string>& nodeIds) {
    expect_object(j, ctx);
    check_keys(j, ctx, {"id", "internal", "uplink", "groups", "nodes"});
    NetworkGroup g;
    g.id = get_string(j, "id", ctx);
    if (!groupIds.insert(g.id).second)
        throw ParseError(ctx + ": duplicate group id \"" + g.id + "\"");
    g.internal = link_metrics_from_json(get_member(j, "internal", ctx), ctx + ".internal");
    auto uplink = j.find("uplink");
    if (isRoot && uplink != j.end())
        throw ParseError(ctx + ": root group must not declare an uplink");
    if (!isRoot && uplink == j.end())
        throw ParseError(ctx + ": non-root group \"" + g.id + "\" is missing its uplink");
    if (uplink != j.end())
        g.uplink = link_metrics_from_json(*uplink, ctx + ".uplink");

    if (auto it = j.find("groups"); it != j.end()) {
        expect_array(*it, ctx + ".groups");
        for (std::size_t i = 0; i < it->size(); ++i)
            g.groups.push_back(group_from_json((*it)[i], ctx + ".groups[" + std::to_string(i) + "]",
                                               false, groupIds, nodeIds));
    }
    if (auto it = j.find("nodes"); it != j.end()) {
        expect_array(*it, ctx + ".nodes");
        for (std::size_t i = 0; i < it->size(); ++i) {
            std::string nctx = ctx + ".nodes[" + std::to_string(i) + "]";
            const json& nj = (*it)[i];
            expect_object(nj, nctx);
            check_keys(nj, nctx,
                       {"id", "arch", "os", "cpuCount", "cpuSpeedMHz", "memoryMB", "storageGB"});
            ComputeNode n;
            n.id = get_string(nj, "id", nctx);
            if (!nodeIds.insert(n.id).second)
                throw ParseError(nctx + ": duplicate node id \"" + n.id + "\"");
            n.arch = get_string(nj, "arch", nctx);
            n.os = get_string(nj, "os", nctx);
            n.cpuCount = get_int(nj, "cpuCount", nctx);
            n.cpuSpeedMHz = get_int(nj, "cpuSpeedMHz", nctx);
            n.memoryMB = get_int(nj, "memoryMB", nctx);
            n.storageGB = get_int(nj, "storageGB", nctx);
            if (n.cpuCount < 1) throw ParseError(nctx + ".cpuCount: must be >= 1");
            if (n.cpuSpeedMHz < 1) throw ParseError(nctx + ".cpuSpeedMHz: must be >= 1");
            if (n.memoryMB < 1) throw ParseError(nctx + ".memoryMB: must be >= 1");
            if (n.storageGB < 0) throw ParseError(nctx + ".storageGB: must be >= 0");
            g.nodes.push_back(std::move(n));
        }
    }
    return g;
}

} // namespace detail

inline json catalog_to_json(const GridCatalog& c) {
    return json{{"formatVersion", 1}, {"group", detail::group_to_json(c.root)}};
}

inline std::string serialize_catalog(const GridCatalog& c) {
    return catalog_to_json(c).dump(2) + "\n";
}

inline GridCatalog parse_catalog(std::string_view text) {
    json j = parse_json_document(text);
    expect_object(j, "catalog");
    check_keys(j, "catalog", {"formatVersion", "group"});
    require_format_version(j, "catalog");
    std::set<std::string> groupIds, nodeIds;
    GridCatalog c;
    c.root = detail::group_from_json(get_member(j, "group", "catalog"), "group", true, groupIds,
                                     nodeIds);
    c.rebuild_index();
    return c;
}

// ---------------------------------------------------------------------------
// Topology queries
// ---------------------------------------------------------------------------

// Effective metrics of the unique tree path between two nodes: each side climbs
// its uplinks to the lowest common ancestor group, whose internal edge is
// crossed exactly once. Latency adds, bandwidth is the path minimum.
inline LinkMetrics path_metrics(const GridCatalog& catalog, std::string_view a,
                                std::string_view b) {
    const auto& chainA = catalog.chain_of(a);
    const auto& chainB = catalog.chain_of(b);
    if (a == b) return {0.0, kUnboundedBandwidth};

    std::size_t common = 0;
    while (common < chainA.size() && common < chainB.size() &&
           chainA[common].groupId == chainB[common].groupId)
        ++common;

    double latency = 0.0;
    double bandwidth = kUnboundedBandwidth;
    auto cross = [&](const LinkMetrics& edge) {
        latency += edge.latencyMs;
        bandwidth = std::min(bandwidth, edge.bandwidthMbps);
    };

    for (std::size_t i = chainA.size(); i > common; --i) cross(*chainA[i - 1].uplink);
    cross(chainA[common - 1].internal); // LCA group; common >= 1 because roots match
    for (std::size_t i = chainB.size(); i > common; --i) cross(*chainB[i - 1].uplink);
    return {latency, bandwidth};
}

// Node ids in the subtree rooted at groupId, in document order.
inline std::vector<std::string> nodes_in_group(const GridCatalog& catalog,
                                               std::string_view groupId) {
    if (!catalog.has_group(groupId))
        throw LookupError("unknown group \"" + std::string(groupId) + "\"");
    std::vector<std::string> out;
    for (const auto& n : catalog.nodes_in_document_order())
        if (catalog.node_in_group(n.id, groupId)) out.push_back(n.id);
    return out;
}

} // namespace griddeploy
