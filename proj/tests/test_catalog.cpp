#include <catch2/catch.hpp>

#include "test_support.hpp"

using namespace griddeploy;
using gdtest::load_catalog;
using gdtest::read_fixture;

TEST_CASE("parse_catalog reads a single-node catalog") {
    GridCatalog c = load_catalog("catalog-min.json");
    CHECK(c.root.id == "root");
    CHECK(c.root.groups.empty());
    REQUIRE(c.nodes_in_document_order().size() == 1);
    CHECK(c.nodes_in_document_order()[0].id == "n1");
    CHECK_FALSE(c.root.uplink.has_value());
}

TEST_CASE("parse_catalog rejects malformed documents") {
    SECTION("duplicate node id") {
        std::string doc = R"({"formatVersion":1,"group":{"id":"r",
            "internal":{"latencyMs":1,"bandwidthMbps":10},
            "nodes":[
              {"id":"n1","arch":"a","os":"o","cpuCount":1,"cpuSpeedMHz":1,"memoryMB":1,"storageGB":0},
              {"id":"n1","arch":"a","os":"o","cpuCount":1,"cpuSpeedMHz":1,"memoryMB":1,"storageGB":0}
            ]}})";
        CHECK_THROWS_WITH(parse_catalog(doc), Catch::Contains("duplicate node id"));
    }
    SECTION("missing uplink on non-root") {
        std::string doc = R"({"formatVersion":1,"group":{"id":"r",
            "internal":{"latencyMs":1,"bandwidthMbps":10},
            "groups":[{"id":"s","internal":{"latencyMs":1,"bandwidthMbps":10}}]}})";
        CHECK_THROWS_WITH(parse_catalog(doc), Catch::Contains("missing its uplink"));
    }
    SECTION("uplink on root") {
        std::string doc = R"({"formatVersion":1,"group":{"id":"r",
            "internal":{"latencyMs":1,"bandwidthMbps":10},
            "uplink":{"latencyMs":1,"bandwidthMbps":10}}})";
        CHECK_THROWS_AS(parse_catalog(doc), ParseError);
    }
    SECTION("non-positive capacity") {
        std::string doc = R"({"formatVersion":1,"group":{"id":"r",
            "internal":{"latencyMs":1,"bandwidthMbps":10},
            "nodes":[{"id":"n1","arch":"a","os":"o","cpuCount":1,"cpuSpeedMHz":1,
                      "memoryMB":0,"storageGB":0}]}})";
        CHECK_THROWS_AS(parse_catalog(doc), ParseError);
    }
    SECTION("zero bandwidth") {
        std::string doc = R"({"formatVersion":1,"group":{"id":"r",
            "internal":{"latencyMs":1,"bandwidthMbps":0}}})";
        CHECK_THROWS_AS(parse_catalog(doc), ParseError);
    }
}

TEST_CASE("two-site fixture has the documented shape") {
    GridCatalog c = load_catalog("catalog-twosite.json");
    CHECK(c.nodes_in_document_order().size() == 4);
    CHECK(c.has_group("core"));
    CHECK(c.has_group("A"));
    CHECK(c.has_group("B"));
    CHECK_FALSE(c.has_group("C"));

    SECTION("nodes_in_group walks subtrees in document order") {
        CHECK(nodes_in_group(c, "core") == std::vector<std::string>{"n1", "n2", "n3", "n4"});
        CHECK(nodes_in_group(c, "A") == std::vector<std::string>{"n1", "n2"});
        CHECK_THROWS_AS(nodes_in_group(c, "zzz"), LookupError);
    }
}

TEST_CASE("path_metrics follows the unique tree path") {
    GridCatalog c = load_catalog("catalog-twosite.json");

    SECTION("identity") {
        LinkMetrics m = path_metrics(c, "n1", "n1");
        CHECK(m.latencyMs == 0.0);
        CHECK(is_unbounded(m.bandwidthMbps));
    }
    SECTION("siblings cross the internal edge once") {
        LinkMetrics m = path_metrics(c, "n1", "n2");
        CHECK(m.latencyMs == Approx(0.1).margin(1e-9));
        CHECK(m.bandwidthMbps == Approx(1000.0));
    }
    SECTION("cross-site path climbs both uplinks and the root internal edge") {
        LinkMetrics m = path_metrics(c, "n1", "n3");
        CHECK(m.latencyMs == Approx(10.2).margin(1e-9));
        CHECK(m.bandwidthMbps == Approx(100.0));
    }
    SECTION("unknown node") {
        CHECK_THROWS_AS(path_metrics(c, "n1", "zzz"), LookupError);
        CHECK_THROWS_AS(path_metrics(c, "zzz", "zzz"), LookupError);
    }
}

TEST_CASE("document order places child-group nodes before a group's own nodes") {
    std::string doc = R"({"formatVersion":1,"group":{"id":"r",
        "internal":{"latencyMs":1,"bandwidthMbps":10},
        "groups":[{"id":"s","uplink":{"latencyMs":1,"bandwidthMbps":10},
                   "internal":{"latencyMs":1,"bandwidthMbps":10},
                   "nodes":[{"id":"inner","arch":"a","os":"o","cpuCount":1,"cpuSpeedMHz":1,
                             "memoryMB":1,"storageGB":0}]}],
        "nodes":[{"id":"outer","arch":"a","os":"o","cpuCount":1,"cpuSpeedMHz":1,
                  "memoryMB":1,"storageGB":0}]}})";
    GridCatalog c = parse_catalog(doc);
    REQUIRE(c.nodes_in_document_order().size() == 2);
    CHECK(c.nodes_in_document_order()[0].id == "inner");
    CHECK(c.nodes_in_document_order()[1].id == "outer");
}

TEST_CASE("fetch_catalog reads files and reports failures") {
    CatalogLocator ok = CatalogLocator::file(gdtest::fixture_path("catalog-min.json"));
    std::string bytes = fetch_catalog(ok);
    CHECK_NOTHROW(parse_catalog(bytes));

    SECTION("missing path names the file") {
        CatalogLocator missing = CatalogLocator::file("/nonexistent/catalog.json");
        CHECK_THROWS_WITH(fetch_catalog(missing), Catch::Contains("/nonexistent/catalog.json"));
    }
    SECTION("empty path is rejected at construction") {
        CHECK_THROWS_AS(CatalogLocator::file(""), InvariantError);
    }
    SECTION("unsupported scheme") {
        CHECK_THROWS_WITH(CatalogLocator::from_string("ldap://mds2.example.org"),
                          Catch::Contains("unsupported"));
        CHECK(CatalogLocator::from_string("file:/tmp/x.json").path == "/tmp/x.json");
        CHECK(CatalogLocator::from_string("plain/path.json").path == "plain/path.json");
    }
}

TEST_CASE("catalog serialization round-trips") {
    for (const char* name : {"catalog-min.json", "catalog-twosite.json", "catalog-deploy.json"}) {
        GridCatalog a = load_catalog(name);
        GridCatalog b = parse_catalog(serialize_catalog(a));
        CHECK(a == b);
    }
    SECTION("unbounded bandwidth survives the round trip") {
        std::string doc = R"({"formatVersion":1,"group":{"id":"r",
            "internal":{"latencyMs":0.5,"bandwidthMbps":"unbounded"}}})";
        GridCatalog c = parse_catalog(doc);
        CHECK(is_unbounded(c.root.internal.bandwidthMbps));
        GridCatalog d = parse_catalog(serialize_catalog(c));
        CHECK(c == d);
    }
}

TEST_CASE("topology metric laws hold on random catalogs") {
    gdtest::Rng rng(555001);
    for (int iter = 0; iter < 40; ++iter) {
        GridCatalog cat = gdtest::random_tree_catalog(rng, 30);
        const auto& nodes = cat.nodes_in_document_order();
        auto pick = [&]() -> const std::string& {
            return nodes[std::size_t(rng.range(0, int(nodes.size()) - 1))].id;
        };
        for (int k = 0; k < 30; ++k) {
            const std::string &a = pick(), &b = pick(), &c = pick();
            LinkMetrics ab = path_metrics(cat, a, b);
            LinkMetrics ba = path_metrics(cat, b, a);
            LinkMetrics bc = path_metrics(cat, b, c);
            LinkMetrics ac = path_metrics(cat, a, c);

            // Symmetry, identity, triangle inequality, bandwidth monotonicity.
            CHECK(ab.latencyMs == ba.latencyMs);
            CHECK(ab.bandwidthMbps == ba.bandwidthMbps);
            LinkMetrics aa = path_metrics(cat, a, a);
            CHECK(aa.latencyMs == 0.0);
            CHECK(is_unbounded(aa.bandwidthMbps));
            CHECK(ac.latencyMs <= ab.latencyMs + bc.latencyMs + 1e-9);
            CHECK(ac.bandwidthMbps >= std::min(ab.bandwidthMbps, bc.bandwidthMbps));

            // Cross-check against the independent edge walker.
            LinkMetrics oracle = gdtest::oracle_path_metrics(cat.root, a, b);
            CHECK(ab.latencyMs == Approx(oracle.latencyMs).margin(1e-9));
            CHECK(ab.bandwidthMbps == oracle.bandwidthMbps);
        }
    }
}
