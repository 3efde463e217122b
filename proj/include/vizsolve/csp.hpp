#ifndef VIZSOLVE_CSP_HPP
#define VIZSOLVE_CSP_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "vizsolve/grid.hpp"
#include "vizsolve/rng.hpp"

namespace vizsolve {

// Per-cell candidate sets as bitmasks; bit k-1 set means digit k is
// still possible. Supports side() up to 32.
struct DomainSet {
    BoxSize size{3};
    std::vector<std::uint32_t> masks;

    static DomainSet full(BoxSize size);
    static DomainSet from_grid(const Grid& g);  // fixed cells become singletons

    bool is_fixed(int cell) const { return (masks[cell] & (masks[cell] - 1)) == 0; }
    bool allows(int cell, int digit) const { return masks[cell] >> (digit - 1) & 1u; }
    int domain_size(int cell) const { return __builtin_popcount(masks[cell]); }
    int fixed_digit(int cell) const { return __builtin_ctz(masks[cell]) + 1; }
};

struct SearchStats {
    std::int64_t nodes_expanded = 0;
    std::int64_t backtracks = 0;
    double wall_time_ms = 0.0;
};

// Fixpoint of forward checking plus hidden singles. Empty result means a
// domain wipeout (contradiction).
std::optional<DomainSet> propagate(const DomainSet& d);

// Backtracking search options shared by the satisfaction entry points.
struct SearchOptions {
    // Value ordering permutations per cell, used by the puzzle generator;
    // empty means ascending digits.
    std::vector<std::vector<int>> value_order;
};

// First complete solution extending `givens` within `domains` under
// MRV / ascending-digit ordering, or nullopt when infeasible.
std::optional<Grid> solve_csp(const Grid& givens, const DomainSet& domains,
                              SearchStats* stats = nullptr,
                              const SearchOptions& opts = {});

std::optional<Grid> solve_csp(const Grid& givens, SearchStats* stats = nullptr);

// Any complete valid extension of `givens` other than `known`, or
// nullopt when `known` is the only one. `known` must be a complete valid
// extension of `givens`.
std::optional<Grid> find_second_solution(const Grid& givens, const Grid& known,
                                         SearchStats* stats = nullptr);

// true iff the givens admit exactly one completion. Throws when they
// admit none.
bool is_unique(const Grid& givens);

// Number of complete valid extensions, capped at `limit`.
std::int64_t count_solutions(const Grid& givens, std::int64_t limit);

struct GeneratedPuzzle {
    Grid givens;
    Grid solution;
    int achieved_givens = 0;  // may exceed target when removals would break uniqueness
};

// Fills an empty board with a seeded random value order, then removes
// cells in seeded random order, keeping every removal that preserves
// uniqueness, until `target_givens` remain or nothing more can go.
GeneratedPuzzle generate_puzzle(BoxSize size, int target_givens, std::uint64_t seed);

}  // namespace vizsolve

#endif
