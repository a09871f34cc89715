#include <doctest.h>

#include <cmath>
#include <random>

#include "irdrop/errors.hpp"
#include "irdrop/solver.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace irdrop;

namespace {

PdnGraph build(const std::string& text) { return build_graph(parse_netlist(text)); }

const char* kOneUnknown =
    "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
    "I1 n1_m1_1000_0 0 0.1\n"
    "V1 n1_m1_0_0 0 1.1\n";

const char* kSeries =
    "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
    "R2 n1_m1_1000_0 n1_m1_2000_0 1.0\n"
    "I1 n1_m1_2000_0 0 0.1\n"
    "V1 n1_m1_0_0 0 1.1\n";

}  // namespace

TEST_CASE("one-unknown stamp") {
    LinearSystem sys = assemble_system(build(kOneUnknown));
    REQUIRE(sys.dim == 1);
    CHECK(sys.val.size() == 1);
    CHECK(sys.val[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(sys.rhs[0] == doctest::Approx(1.0).epsilon(1e-15));  // 1.1*1 - 0.1
}

TEST_CASE("series ladder stamps") {
    LinearSystem sys = assemble_system(build(kSeries));
    REQUIRE(sys.dim == 2);
    // Unknowns in node order: A (=n..1000), B (=n..2000).
    // G = [[2,-1],[-1,1]], J = [1.1, -0.1].
    auto coeff = [&](int r, int c) -> double {
        for (int k = sys.row_ptr[r]; k < sys.row_ptr[r + 1]; ++k)
            if (sys.col[k] == c) return sys.val[k];
        return 0.0;
    };
    CHECK(coeff(0, 0) == doctest::Approx(2.0));
    CHECK(coeff(0, 1) == doctest::Approx(-1.0));
    CHECK(coeff(1, 0) == doctest::Approx(-1.0));
    CHECK(coeff(1, 1) == doctest::Approx(1.0));
    CHECK(sys.rhs[0] == doctest::Approx(1.1));
    CHECK(sys.rhs[1] == doctest::Approx(-0.1));
}

TEST_CASE("floating node is named in the error") {
    PdnGraph g = build(
        "R1 n1_m1_0_0 n1_m1_1000_0 1.0\n"
        "V1 n1_m1_0_0 0 1.1\n"
        "R2 n1_m2_5000_0 n1_m2_6000_0 1.0\n");
    try {
        assemble_system(g);
        FAIL("expected SolveError");
    } catch (const SolveError& e) {
        CHECK(std::string(e.what()).find("n1_m2_5000_0") != std::string::npos);
    }
}

TEST_CASE("hand solutions") {
    {
        PdnGraph g = build(kOneUnknown);
        NodeVoltages v = solve_cg(assemble_system(g), {1e-13, -1});
        CHECK(std::abs(v.volts[1] - 1.0) < 1e-12);
        CHECK(std::abs(v.volts[0] - 1.1) < 1e-15);
    }
    {
        PdnGraph g = build(kSeries);
        NodeVoltages v = solve_cg(assemble_system(g), {1e-13, -1});
        CHECK(std::abs(v.volts[1] - 1.0) < 1e-12);
        CHECK(std::abs(v.volts[2] - 0.9) < 1e-12);
    }
}

TEST_CASE("assembled matrix is symmetric and diagonally dominant") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        PdnGraph g = gen::random_connected_graph(rng, 80);
        LinearSystem sys = assemble_system(g);
        auto coeff = [&](int r, int c) -> double {
            for (int k = sys.row_ptr[r]; k < sys.row_ptr[r + 1]; ++k)
                if (sys.col[k] == c) return sys.val[k];
            return 0.0;
        };
        for (int r = 0; r < sys.dim; ++r) {
            double diag = 0.0, off = 0.0;
            for (int k = sys.row_ptr[r]; k < sys.row_ptr[r + 1]; ++k) {
                if (sys.col[k] == r)
                    diag = sys.val[k];
                else {
                    off += std::abs(sys.val[k]);
                    CHECK(sys.val[k] == coeff(sys.col[k], r));  // symmetry
                }
            }
            CHECK(diag > 0.0);
            CHECK(diag >= off - 1e-12 * diag);
        }
    }
}

TEST_CASE("cg matches the dense elimination oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        PdnGraph g = gen::random_connected_graph(rng, 40 + static_cast<int>(rng() % 160));
        NodeVoltages v = solve_cg(assemble_system(g));
        std::vector<double> ref = oracles::dense_lu_voltages(g);
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(std::abs(v.volts[i] - ref[i]) < 1e-8);
    }
}

TEST_CASE("current conservation at the boundary") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 8; ++trial) {
        PdnGraph g = gen::random_connected_graph(rng, 120);
        NodeVoltages v = solve_cg(assemble_system(g));
        std::vector<char> fixed(g.nodes.size(), 0);
        for (int s : g.vsource_nodes) fixed[s] = 1;
        double boundary_current = 0.0;
        for (const EdgeR& e : g.edges) {
            if (fixed[e.u] == fixed[e.v]) continue;
            const int inner = fixed[e.u] ? e.v : e.u;
            boundary_current += (g.vdd - v.volts[inner]) / e.ohms;
        }
        double injected = 0.0;
        for (const auto& [node, amps] : g.injections)
            if (!fixed[node]) injected += amps;
        if (injected > 0.0)
            CHECK(std::abs(boundary_current - injected) / injected < 1e-6);
    }
}

TEST_CASE("voltages stay within [0, vdd] and drops within [0, vdd]") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        PdnGraph g = gen::random_connected_graph(rng, 100);
        NodeVoltages v = solve_cg(assemble_system(g));
        for (double volts : v.volts) {
            CHECK(volts >= -1e-12);
            CHECK(volts <= g.vdd + 1e-12);
        }
    }
}

TEST_CASE("raising one injection never lowers any drop") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 6; ++trial) {
        PdnGraph g = gen::random_connected_graph(rng, 60);
        std::vector<double> base = oracles::dense_lu_voltages(g);
        PdnGraph bumped = g;
        const std::size_t which = rng() % bumped.injections.size();
        bumped.injections[which].second += 0.01;
        std::vector<double> after = oracles::dense_lu_voltages(bumped);
        NodeVoltages cg_after = solve_cg(assemble_system(bumped));
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(after[i] <= base[i] + 1e-9);  // drop = vdd - V only grows
            CHECK(std::abs(cg_after.volts[i] - after[i]) < 1e-8);
        }
    }
}

TEST_CASE("non-convergence reports the final residual") {
    std::mt19937_64 rng(23);
    PdnGraph g = gen::random_connected_graph(rng, 200);
    try {
        solve_cg(assemble_system(g), {1e-10, 1});
        FAIL("expected SolveError");
    } catch (const SolveError& e) {
        CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
}

TEST_CASE("ir drop map placement and averaging") {
    {
        PdnGraph g = build(kOneUnknown);
        NodeVoltages v = solve_cg(assemble_system(g));
        FeatureMap m = ir_drop_map(g, v, 1000);
        CHECK(m.h == 1);
        CHECK(m.w == 1);
        CHECK(m.at(0, 0) == doctest::Approx(0.1).epsilon(1e-9));
    }
    {
        // Two instances in one cell with different drops -> cell averages.
        PdnGraph g = build(
            "R1 n1_m1_0_0 n1_m1_100_0 1.0\n"
            "R2 n1_m1_0_0 n1_m1_200_0 3.0\n"
            "I1 n1_m1_100_0 0 0.1\n"
            "I2 n1_m1_200_0 0 0.1\n"
            "V1 n1_m1_0_0 0 1.1\n");
        NodeVoltages v = solve_cg(assemble_system(g), {1e-13, -1});
        FeatureMap m = ir_drop_map(g, v, 1000);
        CHECK(m.h == 1);
        CHECK(m.w == 1);
        CHECK(m.at(0, 0) == doctest::Approx(0.2).epsilon(1e-9));  // (0.1 + 0.3)/2
    }
    {
        PdnGraph g = build("R1 n1_m1_0_0 n1_m1_1000_0 1.0\nV1 n1_m1_0_0 0 1.1\n");
        NodeVoltages v = solve_cg(assemble_system(g));
        CHECK_THROWS_AS(ir_drop_map(g, v, 1000), GraphError);
    }
}

TEST_CASE("ladder map matches the oracle per cell") {
    // 5-rung ladder along x, one instance per rung.
    std::string text;
    for (int i = 0; i < 5; ++i)
        text += "R" + std::to_string(i + 1) + " n1_m1_" + std::to_string(i * 1000) + "_0 n1_m1_" +
                std::to_string((i + 1) * 1000) + "_0 0.7\n";
    for (int i = 1; i <= 5; ++i)
        text += "I" + std::to_string(i) + " n1_m1_" + std::to_string(i * 1000) + "_0 0 0.01\n";
    text += "V1 n1_m1_0_0 0 1.1\n";
    PdnGraph g = build(text);
    NodeVoltages v = solve_cg(assemble_system(g), {1e-13, -1});
    std::vector<double> ref = oracles::dense_lu_voltages(g);
    FeatureMap m = ir_drop_map(g, v, 1000);
    REQUIRE(m.h == 1);
    REQUIRE(m.w == 5);  // extent 5000 nm at 1000 nm cells
    CHECK(m.at(0, 0) == 0.0);
    for (int i = 1; i <= 3; ++i)
        CHECK(m.at(0, i) == doctest::Approx(g.vdd - ref[i]).epsilon(1e-10));
    // x = 4000 and the boundary point x = 5000 share the last column.
    const double expect = (2.0 * g.vdd - ref[4] - ref[5]) / 2.0;
    CHECK(m.at(0, 4) == doctest::Approx(expect).epsilon(1e-10));
}
