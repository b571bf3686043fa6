#include <catch2/catch.hpp>

#include "test_support.hpp"

using namespace griddeploy;
using gdtest::load_assembly;
using gdtest::load_catalog;

namespace {

ServerPlacement server(std::string id, bool infra = false) {
    ServerPlacement s;
    s.serverId = std::move(id);
    s.nodeId = "n1";
    s.components = {{s.serverId, 0}};
    s.infrastructure = infra;
    return s;
}

} // namespace

TEST_CASE("sha256 matches the reference vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Multi-block input.
    std::string longInput(200, 'x');
    CHECK(sha256_hex(longInput) == sha256_hex(longInput));
    CHECK(sha256_hex(longInput) != sha256_hex(longInput + "x"));
}

TEST_CASE("compute_launch_order orders lexicographically without flows") {
    auto result = compute_launch_order({server("b"), server("a")}, {});
    CHECK(result.order == std::vector<std::string>{"a", "b"});
    CHECK(result.warnings.empty());
}

TEST_CASE("compute_launch_order follows data-flow chains") {
    auto result = compute_launch_order({server("c"), server("a"), server("b")},
                                       {{"a", "b", "k1"}, {"b", "c", "k2"}});
    CHECK(result.order == std::vector<std::string>{"a", "b", "c"});
    CHECK(result.warnings.empty());
}

TEST_CASE("compute_launch_order degrades cycles to a warning") {
    auto result = compute_launch_order({server("a"), server("b"), server("r", true)},
                                       {{"a", "b", "k1"}, {"b", "a", "k2"}});
    CHECK(result.order == std::vector<std::string>{"r", "a", "b"});
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0] == kCycleWarning);

    SECTION("downstream of a cycle resumes after the peel") {
        auto r2 = compute_launch_order(
            {server("a"), server("b"), server("z"), server("d")},
            {{"a", "b", "k1"}, {"b", "a", "k2"}, {"b", "d", "k3"}});
        CHECK(r2.order == std::vector<std::string>{"z", "a", "b", "d"});
        REQUIRE(r2.warnings.size() == 1);
    }
}

TEST_CASE("assemble_plan builds servers, flows, and measured metrics") {
    ComponentAssembly assembly = load_assembly("assembly-coupled.json");
    GridCatalog catalog = load_catalog("catalog-deploy.json");
    PlanningProblem problem = make_problem(assembly, catalog);

    std::map<std::string, std::string> placement{
        {"solver-a", "grid-1"}, {"coupler", "grid-2"}, {"registry", "grid-3"}};
    DeploymentPlan plan = assemble_plan(problem, placement);

    REQUIRE(plan.servers.size() == 4);
    CHECK(plan.find_server("registry")->infrastructure);
    CHECK(plan.find_server("solver-a")->components.size() == 2);
    CHECK(plan.find_server("solver-a")->nodeId == "grid-1");
    CHECK(plan.find_server("coupler")->nodeId == "grid-2");
    CHECK(plan.find_server("viz")->nodeId == "grid-2");

    CHECK(plan.launchOrder ==
          std::vector<std::string>{"registry", "solver-a", "coupler", "viz"});

    // couple is intra-server: kept in connections with the identity path,
    // omitted from data flows.
    REQUIRE(plan.dataFlows.size() == 3);
    for (const auto& f : plan.dataFlows) CHECK(f.connectionId != "couple");
    const ConnectionPlan* couple = nullptr;
    const ConnectionPlan* frames = nullptr;
    for (const auto& c : plan.connections) {
        if (c.connectionId == "couple") couple = &c;
        if (c.connectionId == "frames") frames = &c;
    }
    REQUIRE(couple);
    CHECK(couple->measured.latencyMs == 0.0);
    CHECK(is_unbounded(couple->measured.bandwidthMbps));
    // frames spans two servers on one node: still the identity path.
    REQUIRE(frames);
    CHECK(frames->sourceServer == "coupler");
    CHECK(frames->targetServer == "viz");
    CHECK(frames->measured.latencyMs == 0.0);

    SECTION("single process group yields a one-server plan") {
        ComponentAssembly mini = load_assembly("assembly-min.json");
        PlanningProblem pm = make_problem(mini, load_catalog("catalog-min.json"));
        DeploymentPlan p = assemble_plan(pm, {{"a", "n1"}});
        REQUIRE(p.servers.size() == 1);
        CHECK(p.launchOrder == std::vector<std::string>{"a"});
        CHECK(p.dataFlows.empty());
    }
    SECTION("missing host group placement is an error") {
        CHECK_THROWS_AS(assemble_plan(problem, {{"solver-a", "grid-1"}}), LookupError);
    }
}

TEST_CASE("plan serialization is canonical and validated on load") {
    ComponentAssembly assembly = load_assembly("assembly-coupled.json");
    GridCatalog catalog = load_catalog("catalog-deploy.json");
    PlanningProblem problem = make_problem(assembly, catalog);
    DeploymentPlan plan = plan_constrained(problem);

    std::string bytes = serialize_plan(plan);
    DeploymentPlan reloaded = deserialize_plan(bytes);
    CHECK(reloaded == plan);
    CHECK(serialize_plan(reloaded) == bytes);

    SECTION("two planner runs emit identical bytes") {
        CHECK(serialize_plan(plan_constrained(problem)) == bytes);
    }
    SECTION("tampered launch order fails to load") {
        json doc = plan_to_json(plan);
        doc["launchOrder"].erase(0);
        CHECK_THROWS_WITH(deserialize_plan(doc.dump()), Catch::Contains("permutation"));
    }
    SECTION("violated required bounds fail to load") {
        json doc = plan_to_json(plan);
        for (auto& cj : doc["connections"])
            if (cj["connectionId"] == "flow-a") cj["measured"]["latencyMs"] = 99.0;
        CHECK_THROWS_WITH(deserialize_plan(doc.dump()), Catch::Contains("required bounds"));
    }
    SECTION("unknown keys are rejected") {
        json doc = plan_to_json(plan);
        doc["note"] = "hello";
        CHECK_THROWS_AS(deserialize_plan(doc.dump()), ParseError);
    }
}

TEST_CASE("problem digest pins all three inputs") {
    ComponentAssembly assembly = load_assembly("assembly-coupled.json");
    GridCatalog catalog = load_catalog("catalog-deploy.json");
    PlanningProblem problem = make_problem(assembly, catalog);

    std::string digest = problem_digest(problem);
    CHECK(digest.size() == 64);
    CHECK(digest == problem_digest(problem));

    PlanningProblem other = make_problem(assembly, load_catalog("catalog-twosite.json"));
    CHECK(digest != problem_digest(other));

    UserGoal goal;
    goal.objective = Objective::MinimizeTotalLatency;
    PlanningProblem withGoal = make_problem(assembly, catalog, goal);
    CHECK(digest != problem_digest(withGoal));
}

TEST_CASE("launch order respects random acyclic data flows") {
    gdtest::Rng rng(424242);
    for (int iter = 0; iter < 200; ++iter) {
        int n = rng.range(1, 20);
        std::vector<ServerPlacement> servers;
        for (int i = 0; i < n; ++i) {
            ServerPlacement s = server("s" + std::to_string(i));
            s.infrastructure = rng.chance(0.2);
            servers.push_back(std::move(s));
        }
        // Forward edges only (i < j) between regular servers: acyclic by
        // construction.
        std::vector<DataFlow> flows;
        int edges = rng.range(0, 2 * n);
        for (int e = 0; e < edges; ++e) {
            int i = rng.range(0, n - 1), j = rng.range(0, n - 1);
            if (i >= j) continue;
            if (servers[i].infrastructure || servers[j].infrastructure) continue;
            flows.push_back({"s" + std::to_string(i), "s" + std::to_string(j),
                             "e" + std::to_string(e)});
        }
        auto result = compute_launch_order(servers, flows);
        CHECK(result.warnings.empty());
        std::string complaint;
        bool ok = gdtest::launch_order_respects(servers, flows, result.order, &complaint);
        INFO(complaint);
        CHECK(ok);

        auto again = compute_launch_order(servers, flows);
        CHECK(again.order == result.order);
    }
}
