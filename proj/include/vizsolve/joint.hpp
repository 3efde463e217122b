#ifndef VIZSOLVE_JOINT_HPP
#define VIZSOLVE_JOINT_HPP

#include <optional>
#include <utility>
#include <vector>

#include "vizsolve/csp.hpp"
#include "vizsolve/grid.hpp"

namespace vizsolve {

// A forbidden full assignment to the given cells; any completion of it
// is excluded from search.
struct Nogood {
    std::vector<std::pair<int, int>> assignment;  // (cell, digit), sorted by cell

    static Nogood from_solution(const Grid& solution, const std::vector<int>& given_cells);
    bool operator==(const Nogood&) const = default;
};

struct SolveOutcome {
    std::optional<Grid> solution;
    std::optional<double> objective;  // present for the hybrid methods only
    SearchStats stats;
    int nogoods_used = 0;

    bool infeasible() const { return !solution.has_value(); }
};

// Argmax labels per given cell (ties toward the lower digit), then plain
// satisfaction solving on the resulting grid.
SolveOutcome solve_baseline(const ProbField& p);

// Given cells keep their k cheapest digits (ties toward the lower
// digit); all other cells keep full domains.
DomainSet restrict_top_k(const CostField& c, int k);

// Exact minimization of the summed given-cell costs by branch and bound
// over the propagation-based search; nogoods exclude their completions.
SolveOutcome solve_hybrid1(const CostField& c, int k,
                           const std::vector<Nogood>& nogoods = {});

// Re-optimizes with an accumulating nogood on the givens until the
// returned solution's givens admit a unique completion. Throws when the
// loop exceeds `iteration_cap`.
SolveOutcome solve_hybrid2(const CostField& c, int k, int iteration_cap = 1000);

// Objective value of a complete solution under a cost field.
double solution_cost(const CostField& c, const Grid& solution);

}  // namespace vizsolve

#endif
