#include "vizsolve/joint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vizsolve {

Nogood Nogood::from_solution(const Grid& solution, const std::vector<int>& given_cells) {
    Nogood ng;
    ng.assignment.reserve(given_cells.size());
    for (int cell : given_cells) ng.assignment.emplace_back(cell, solution.cells[cell]);
    return ng;
}

double solution_cost(const CostField& c, const Grid& solution) {
    double total = 0.0;
    for (const auto& [cell, costs] : c.entries) {
        const int digit = solution.cells[cell];
        total += costs[digit - 1];
    }
    return total;
}

SolveOutcome solve_baseline(const ProbField& p) {
    SolveOutcome out;
    Grid givens = Grid::empty(p.size);
    for (const auto& [cell, probs] : p.entries) givens.cells[cell] = argmax_digit(probs);
    out.solution = solve_csp(givens, &out.stats);
    return out;
}

DomainSet restrict_top_k(const CostField& c, int k) {
    const int side = c.size.side();
    if (k < 1 || k > side) throw std::invalid_argument("top-k out of range");
    DomainSet d = DomainSet::full(c.size);
    for (const auto& [cell, costs] : c.entries) {
        std::vector<int> digits(side);
        std::iota(digits.begin(), digits.end(), 1);
        std::stable_sort(digits.begin(), digits.end(),
                         [&](int a, int b) { return costs[a - 1] < costs[b - 1]; });
        std::uint32_t mask = 0;
        for (int i = 0; i < k; ++i) mask |= 1u << (digits[i] - 1);
        d.masks[cell] = mask;
    }
    return d;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class BranchAndBound {
public:
    BranchAndBound(const CostField& costs, const std::vector<Nogood>& nogoods)
        : nogoods_(nogoods) {
        cost_of_.assign(costs.size.cell_count(), nullptr);
        for (const auto& [cell, vec] : costs.entries) {
            given_cells_.push_back(cell);
            cost_of_[cell] = &vec;
        }
        // Given cells grouped by row, column and box, for the unit
        // conflict term of the bound.
        const int side = costs.size.side();
        const int n = costs.size.n;
        min_digit_.assign(costs.size.cell_count(), 0);
        regret_.assign(costs.size.cell_count(), 0.0);
        unit_givens_.assign(3 * side, {});
        for (int cell : given_cells_) {
            const int row = cell / side, col = cell % side;
            unit_givens_[row].push_back(cell);
            unit_givens_[side + col].push_back(cell);
            unit_givens_[2 * side + (row / n) * n + col / n].push_back(cell);
        }
    }

    SolveOutcome run(const DomainSet& root) {
        const auto start = std::chrono::steady_clock::now();
        auto prop = propagate(root);
        if (prop) search(*prop);
        SolveOutcome out;
        out.stats = stats_;
        out.stats.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();
        if (best_) {
            out.solution = std::move(best_);
            out.objective = best_obj_;
        }
        return out;
    }

private:
    // Admissible bound: each given cell contributes the cheapest digit
    // still in its domain (fixed cells their exact cost), plus a unit
    // conflict term — when several unfixed givens in one unit share the
    // same cheapest digit, all but one must pay at least their
    // second-cheapest. Units within a partition are disjoint, so each
    // partition's total is admissible; take the best of the three.
    double bound(const DomainSet& d) {
        const int side = d.size.side();
        double base = 0.0;
        for (int cell : given_cells_) {
            const auto& costs = *cost_of_[cell];
            std::uint32_t mask = d.masks[cell];
            double m = kInf, m2 = kInf;
            int md = 0;
            while (mask) {
                const int k = __builtin_ctz(mask);
                mask &= mask - 1;
                if (costs[k] < m) {
                    m2 = m;
                    m = costs[k];
                    md = k + 1;
                } else {
                    m2 = std::min(m2, costs[k]);
                }
            }
            base += m;
            min_digit_[cell] = md;
            regret_[cell] = m2 - m;
        }

        double extra[3] = {0.0, 0.0, 0.0};
        for (int u = 0; u < 3 * side; ++u) {
            // Per cheapest digit: count of contenders and the largest
            // regret among them (the cell allowed to keep its minimum).
            double sum = 0.0, max_regret[32];
            int count[32] = {0};
            for (int cell : unit_givens_[u]) {
                if (d.is_fixed(cell)) continue;
                const int k = min_digit_[cell] - 1;
                if (count[k] == 0 || regret_[cell] > max_regret[k]) {
                    if (count[k] > 0) sum += max_regret[k];
                    max_regret[k] = regret_[cell];
                } else {
                    sum += regret_[cell];
                }
                ++count[k];
            }
            extra[u / side] += sum;
        }
        return base + std::max({extra[0], extra[1], extra[2]});
    }

    bool hits_nogood(const DomainSet& d) const {
        for (const auto& ng : nogoods_) {
            bool match = true;
            for (const auto& [cell, digit] : ng.assignment)
                if (d.fixed_digit(cell) != digit) {
                    match = false;
                    break;
                }
            if (match) return true;
        }
        return false;
    }

    void search(const DomainSet& d) {
        const double b = bound(d);
        if (b >= best_obj_) return;

        // Only given cells carry cost, so branch over those alone.
        // Highest-regret cell first (largest gap between its two
        // cheapest digits): deviations from the greedy dive then cost
        // the most near the root, where the bound prunes whole
        // subtrees. Ties toward the lowest index.
        int cell = -1;
        double best_regret = -1.0;
        for (int gc : given_cells_) {
            if (d.is_fixed(gc)) continue;
            if (regret_[gc] > best_regret) {
                best_regret = regret_[gc];
                cell = gc;
            }
        }
        if (cell < 0) {
            // All givens fixed; b is the exact objective. Completing the
            // board is now pure satisfaction, delegated to the same solver
            // the baseline uses (so k = 1 reproduces it exactly).
            if (!nogoods_.empty() && hits_nogood(d)) return;
            Grid g = Grid::empty(d.size);
            for (int gc : given_cells_) g.cells[gc] = d.fixed_digit(gc);
            SearchStats leaf;
            auto full = solve_csp(g, &leaf);
            stats_.nodes_expanded += leaf.nodes_expanded;
            stats_.backtracks += leaf.backtracks;
            if (full) {
                best_ = std::move(full);
                best_obj_ = b;
            }
            return;
        }

        const int side = d.size.side();
        std::vector<int> digits;
        digits.reserve(side);
        for (int digit = 1; digit <= side; ++digit)
            if (d.allows(cell, digit)) digits.push_back(digit);
        if (cost_of_[cell]) {
            const auto& costs = *cost_of_[cell];
            std::stable_sort(digits.begin(), digits.end(),
                             [&](int a, int b2) { return costs[a - 1] < costs[b2 - 1]; });
        }
        for (int digit : digits) {
            ++stats_.nodes_expanded;
            DomainSet child = d;
            child.masks[cell] = 1u << (digit - 1);
            auto prop = propagate(child);
            if (!prop) {
                ++stats_.backtracks;
                continue;
            }
            search(*prop);
        }
    }

    const std::vector<Nogood>& nogoods_;
    std::vector<int> given_cells_;
    std::vector<const std::vector<double>*> cost_of_;
    std::vector<std::vector<int>> unit_givens_;
    std::vector<int> min_digit_;
    std::vector<double> regret_;
    std::optional<Grid> best_;
    double best_obj_ = kInf;
    SearchStats stats_;
};

}  // namespace

SolveOutcome solve_hybrid1(const CostField& c, int k, const std::vector<Nogood>& nogoods) {
    BranchAndBound bnb(c, nogoods);
    SolveOutcome out = bnb.run(restrict_top_k(c, k));
    out.nogoods_used = static_cast<int>(nogoods.size());
    return out;
}

SolveOutcome solve_hybrid2(const CostField& c, int k, int iteration_cap) {
    std::vector<Nogood> nogoods;
    const std::vector<int> given_cells = c.given_cells();
    SearchStats total;
    for (int iter = 0; iter < iteration_cap; ++iter) {
        SolveOutcome out = solve_hybrid1(c, k, nogoods);
        total.nodes_expanded += out.stats.nodes_expanded;
        total.backtracks += out.stats.backtracks;
        total.wall_time_ms += out.stats.wall_time_ms;
        out.stats = total;
        out.nogoods_used = static_cast<int>(nogoods.size());
        if (out.infeasible()) return out;

        const Grid givens = out.solution->restricted_to(given_cells);
        auto second = find_second_solution(givens, *out.solution);
        if (!second) return out;
        nogoods.push_back(Nogood::from_solution(*out.solution, given_cells));
    }
    throw std::runtime_error("uniqueness loop exceeded iteration cap");
}

}  // namespace vizsolve
