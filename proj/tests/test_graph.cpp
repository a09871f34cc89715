#include <doctest.h>

#include <random>

#include "irdrop/errors.hpp"
#include "irdrop/graph.hpp"
#include "support/generators.hpp"

using namespace irdrop;

namespace {

PdnGraph build(const std::string& text, double vdd = kDefaultVdd) {
    return build_graph(parse_netlist(text), vdd);
}

}  // namespace

TEST_CASE("direct construction") {
    PdnGraph g = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
        "I1 n1_m1_1000_0 0 0.1\n"
        "V1 n1_m1_0_0 0 1.1\n");
    CHECK(g.nodes.size() == 2);
    CHECK(g.edges.size() == 1);
    CHECK(g.injections.size() == 1);
    CHECK(g.vsource_nodes.size() == 1);
    CHECK(g.nodes[0].raw == "n1_m1_0_0");
    CHECK(g.instances()[0].amps == doctest::Approx(0.1));
}

TEST_CASE("zero-ohm resistors merge endpoints") {
    PdnGraph g = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 0\n"
        "R2 n1_m1_0_0 n1_m1_2000_0 1.0\n"
        "V1 n1_m1_2000_0 0 1.1\n");
    CHECK(g.nodes.size() == 2);  // first two names collapsed
    CHECK(g.edges.size() == 1);

    // A nonzero resistor that becomes a self-loop after merging is dropped.
    PdnGraph h = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 0\n"
        "R2 n1_m1_0_0 n1_m1_1000_0 0.5\n"
        "V1 n1_m1_0_0 0 1.1\n");
    CHECK(h.nodes.size() == 1);
    CHECK(h.edges.empty());
}

TEST_CASE("parallel resistors are kept") {
    PdnGraph g = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
        "R2 n1_m1_0_0 n1_m1_1000_0 2.0\n"
        "V1 n1_m1_0_0 0 1.1\n");
    CHECK(g.edges.size() == 2);
}

TEST_CASE("current sources on one node sum") {
    PdnGraph g = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
        "I1 n1_m1_1000_0 0 0.1\n"
        "I2 n1_m1_1000_0 0 0.2\n"
        "V1 n1_m1_0_0 0 1.1\n");
    REQUIRE(g.injections.size() == 1);
    CHECK(g.injections[0].second == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("voltage source off the rail is rejected") {
    CHECK_THROWS_AS(build("V1 n1_m1_0_0 0 1.0\n"), GraphError);
    CHECK_NOTHROW(build("V1 n1_m1_0_0 0 1.1\n"));
}

TEST_CASE("resistor touching ground is rejected") {
    CHECK_THROWS_AS(build("R1 n1_m1_0_0 0 1.0\n"), GraphError);
}

TEST_CASE("injected current is conserved") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        gen::PdnParams p;
        p.m1_rails = 5 + static_cast<int>(rng() % 5);
        p.m4_rails = 5 + static_cast<int>(rng() % 5);
        p.seed = rng();
        PdnNetlist netlist = parse_netlist(gen::grid_pdn_netlist(p));
        PdnGraph g = build_graph(netlist);
        double netlist_total = 0.0;
        for (const CurrentSource& cs : netlist.current_sources) netlist_total += cs.amps;
        double graph_total = 0.0;
        for (const auto& [node, amps] : g.injections) graph_total += amps;
        CHECK(graph_total == doctest::Approx(netlist_total).epsilon(1e-12));
    }
}

TEST_CASE("build is deterministic and never grows the node set") {
    PdnNetlist netlist = parse_netlist(gen::grid_pdn_netlist({}));
    PdnGraph a = build_graph(netlist);
    PdnGraph b = build_graph(netlist);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) CHECK(a.nodes[i].raw == b.nodes[i].raw);
    CHECK(a.nodes.size() <= netlist.resistors.size() * 2 + netlist.current_sources.size() +
                                netlist.voltage_sources.size());
}

TEST_CASE("validate: healthy graph") {
    PdnGraph g = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
        "I1 n1_m1_1000_0 0 0.1\n"
        "V1 n1_m1_0_0 0 1.1\n");
    Diagnostics d = validate(g);
    CHECK(d.components == 1);
    CHECK(d.floating_components == 0);
    CHECK(d.max_degree == 1);
    CHECK_FALSE(d.degree_over_6);
}

TEST_CASE("validate: floating component detected") {
    PdnGraph g = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
        "V1 n1_m1_0_0 0 1.1\n"
        "R2 n1_m2_0_0 n1_m2_1000_0 1.0\n");
    Diagnostics d = validate(g);
    CHECK(d.components == 2);
    CHECK(d.floating_components == 1);
}

TEST_CASE("validate: empty graph") {
    Diagnostics d = validate(PdnGraph{});
    CHECK(d.node_count == 0);
    CHECK(d.edge_count == 0);
    CHECK(d.components == 0);
    CHECK(d.floating_components == 0);
}

TEST_CASE("validate: degree warning over 6") {
    std::string text;
    for (int i = 1; i <= 7; ++i)
        text += "R" + std::to_string(i) + " n1_m1_0_0 n1_m1_" + std::to_string(1000 * i) +
                "_0 1.0\n";
    text += "V1 n1_m1_0_0 0 1.1\n";
    Diagnostics d = validate(build(text));
    CHECK(d.max_degree == 7);
    CHECK(d.degree_over_6);
    CHECK(d.to_json().find("\"degree_over_6\":true") != std::string::npos);
}
