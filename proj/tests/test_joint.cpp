#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle4x4.hpp"
#include "vizsolve/joint.hpp"
#include "vizsolve/rng.hpp"
#include "vizsolve/simulator.hpp"

using namespace vizsolve;

namespace {

// A random 4x4 instance: unique puzzle plus noisy probability field.
struct Instance4 {
    Grid givens;
    Grid solution;
    ProbField field;
    CostField costs;
};

Instance4 make_instance(std::uint64_t seed, double confidence = 2.0) {
    Instance4 inst;
    const auto puz = generate_puzzle(BoxSize{2}, 7, seed);
    inst.givens = puz.givens;
    inst.solution = puz.solution;
    NoiseParams params{confidence, 1.0, 0.05, seed};
    inst.field = simulate_field(puz.solution, puz.givens, params);
    inst.costs = to_cost_field(inst.field);
    return inst;
}

ProbField one_hot_field(const Grid& solution, const Grid& givens) {
    ProbField f;
    f.size = solution.size;
    for (int cell = 0; cell < solution.size.cell_count(); ++cell) {
        if (givens.cells[cell] == 0) continue;
        std::vector<double> probs(solution.size.side(), 0.0);
        probs[solution.cells[cell] - 1] = 1.0;
        f.entries.emplace(cell, probs);
    }
    return f;
}

}  // namespace

TEST_CASE("solve_baseline with a perfect classifier returns the true solution") {
    const auto puz = generate_puzzle(BoxSize{2}, 7, 1);
    const auto out = solve_baseline(one_hot_field(puz.solution, puz.givens));
    REQUIRE(out.solution.has_value());
    CHECK(*out.solution == puz.solution);
    CHECK_FALSE(out.objective.has_value());
}

TEST_CASE("solve_baseline fails when the argmax violates a row") {
    // A field whose argmax puts the same digit twice in row 1.
    ProbField f;
    f.size = BoxSize{2};
    std::vector<double> one_at_2{0.0, 1.0, 0.0, 0.0};
    f.entries.emplace(0, one_at_2);
    f.entries.emplace(1, one_at_2);
    const auto out = solve_baseline(f);
    CHECK(out.infeasible());
}

TEST_CASE("restrict_top_k selects the cheapest digits") {
    CostField c;
    c.size = BoxSize{2};
    c.entries.emplace(0, std::vector<double>{0.1, 0.2, 0.3, 0.4});
    const DomainSet d2 = restrict_top_k(c, 2);
    CHECK(d2.masks[0] == 0b0011);
    CHECK(d2.masks[1] == 0b1111);  // non-given cells keep full domains
    const DomainSet d4 = restrict_top_k(c, 4);
    CHECK(d4.masks[0] == 0b1111);
    CHECK_THROWS(restrict_top_k(c, 0));
    CHECK_THROWS(restrict_top_k(c, 5));
}

TEST_CASE("restrict_top_k breaks cost ties toward the lower digit") {
    CostField c;
    c.size = BoxSize{2};
    c.entries.emplace(0, std::vector<double>{0.5, 0.5, 0.5, 0.5});
    CHECK(restrict_top_k(c, 1).masks[0] == 0b0001);
    CHECK(restrict_top_k(c, 2).masks[0] == 0b0011);
}

TEST_CASE("solve_hybrid1 with one-hot costs has objective zero") {
    const auto puz = generate_puzzle(BoxSize{2}, 7, 2);
    const auto costs = to_cost_field(one_hot_field(puz.solution, puz.givens));
    const auto out = solve_hybrid1(costs, 4);
    REQUIRE(out.solution.has_value());
    CHECK(*out.solution == puz.solution);
    CHECK(*out.objective == doctest::Approx(0.0));
}

TEST_CASE("solve_hybrid1 matches the brute-force optimum at 4x4") {
    for (int seed = 0; seed < 30; ++seed) {
        const auto inst = make_instance(1000 + seed);
        const auto out = solve_hybrid1(inst.costs, 4);
        REQUIRE(out.solution.has_value());
        const auto oracle = oracle4x4::brute_force_optimum(
            inst.costs, inst.field.given_cells(), 4, false);
        CHECK(*out.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
        CHECK(check_rules(*out.solution));
    }
}

TEST_CASE("solve_hybrid1 respects top-k restrictions and monotonicity in k") {
    for (int seed = 0; seed < 10; ++seed) {
        const auto inst = make_instance(2000 + seed);
        double prev = -std::numeric_limits<double>::infinity();
        for (int k = 4; k >= 1; --k) {
            const auto out = solve_hybrid1(inst.costs, k);
            const auto oracle = oracle4x4::brute_force_optimum(
                inst.costs, inst.field.given_cells(), k, false);
            if (out.solution.has_value()) {
                CHECK(*out.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
                CHECK(*out.objective >= prev - 1e-9);  // smaller k never improves
                const DomainSet domains = restrict_top_k(inst.costs, k);
                for (int cell : inst.field.given_cells())
                    CHECK(domains.allows(cell, out.solution->cells[cell]));
                prev = *out.objective;
            } else {
                CHECK(oracle.argmins.empty());
                break;
            }
        }
    }
}

TEST_CASE("solve_hybrid1 objective never exceeds a feasible baseline's cost") {
    for (int seed = 0; seed < 20; ++seed) {
        const auto inst = make_instance(3000 + seed);
        const auto base = solve_baseline(inst.field);
        if (base.infeasible()) continue;
        const auto out = solve_hybrid1(inst.costs, 4);
        REQUIRE(out.solution.has_value());
        CHECK(*out.objective <= solution_cost(inst.costs, *base.solution) + 1e-9);
    }
}

TEST_CASE("nogoods exclude their completions") {
    const auto inst = make_instance(4000);
    const auto first = solve_hybrid1(inst.costs, 4);
    REQUIRE(first.solution.has_value());
    const auto given_cells = inst.field.given_cells();
    std::vector<Nogood> nogoods{Nogood::from_solution(*first.solution, given_cells)};
    const auto second = solve_hybrid1(inst.costs, 4, nogoods);
    if (second.solution.has_value()) {
        CHECK(second.solution->restricted_to(given_cells) !=
              first.solution->restricted_to(given_cells));
        CHECK(*second.objective >= *first.objective - 1e-9);
    }
}

TEST_CASE("solve_hybrid2 returns solutions with unique givens") {
    for (int seed = 0; seed < 30; ++seed) {
        const auto inst = make_instance(5000 + seed, 1.0);
        const auto out = solve_hybrid2(inst.costs, 4);
        REQUIRE(out.solution.has_value());
        const auto givens = out.solution->restricted_to(inst.field.given_cells());
        CHECK(is_unique(givens));

        const auto oracle = oracle4x4::brute_force_optimum(
            inst.costs, inst.field.given_cells(), 4, true);
        CHECK(*out.objective == doctest::Approx(oracle.objective).epsilon(1e-9));

        const auto h1 = solve_hybrid1(inst.costs, 4);
        CHECK(*out.objective >= *h1.objective - 1e-9);
        if (*out.objective > *h1.objective + 1e-9) CHECK(out.nogoods_used > 0);
    }
}

TEST_CASE("solve_hybrid2 exits immediately when hybrid1's givens are unique") {
    const auto puz = generate_puzzle(BoxSize{2}, 8, 6000);
    const auto costs = to_cost_field(one_hot_field(puz.solution, puz.givens));
    const auto h1 = solve_hybrid1(costs, 4);
    const auto h2 = solve_hybrid2(costs, 4);
    REQUIRE(h2.solution.has_value());
    CHECK(*h2.solution == *h1.solution);
    CHECK(h2.nogoods_used == 0);
}

TEST_CASE("solve_hybrid2 iteration cap converts runaway loops into an error") {
    // Two givens can never pin down a 4x4 board, so every optimum is
    // rejected for non-uniqueness and the loop runs until the cap.
    CostField c;
    c.size = BoxSize{2};
    const double u = std::log(4.0);
    for (int cell : {0, 1}) c.entries.emplace(cell, std::vector<double>(4, u));
    CHECK_THROWS_AS(solve_hybrid2(c, 4, 3), std::runtime_error);
}
