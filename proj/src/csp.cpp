#include "vizsolve/csp.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <stdexcept>

namespace vizsolve {
namespace {

// Row/column/box membership per cell, cached per board side.
struct Units {
    int side = 0;
    std::vector<std::vector<int>> units;          // 3*side units, each `side` cells
    std::vector<std::vector<int>> peers;          // per cell, 3*(side-1)-ish peers
    std::vector<std::vector<int>> units_of_cell;  // per cell, the 3 unit ids
};

const Units& units_for(BoxSize size) {
    static std::mutex mtx;
    static std::deque<Units> cache;  // deque keeps returned references stable
    std::lock_guard<std::mutex> lock(mtx);
    const int side = size.side();
    for (const auto& u : cache)
        if (u.side == side) return u;

    Units u;
    u.side = side;
    const int n = size.n;
    u.units.assign(3 * side, {});
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            const int cell = r * side + c;
            const int box = (r / n) * n + c / n;
            u.units[r].push_back(cell);
            u.units[side + c].push_back(cell);
            u.units[2 * side + box].push_back(cell);
        }
    u.units_of_cell.assign(side * side, {});
    for (int id = 0; id < 3 * side; ++id)
        for (int cell : u.units[id]) u.units_of_cell[cell].push_back(id);
    u.peers.assign(side * side, {});
    for (int cell = 0; cell < side * side; ++cell) {
        std::vector<bool> seen(side * side, false);
        for (int id : u.units_of_cell[cell])
            for (int other : u.units[id])
                if (other != cell && !seen[other]) {
                    seen[other] = true;
                    u.peers[cell].push_back(other);
                }
    }
    cache.push_back(std::move(u));
    return cache.back();
}

}  // namespace

DomainSet DomainSet::full(BoxSize size) {
    const std::uint32_t all = size.side() == 32 ? ~0u : (1u << size.side()) - 1;
    return DomainSet{size, std::vector<std::uint32_t>(size.cell_count(), all)};
}

DomainSet DomainSet::from_grid(const Grid& g) {
    DomainSet d = full(g.size);
    for (int cell = 0; cell < g.size.cell_count(); ++cell)
        if (g.cells[cell] != 0) d.masks[cell] = 1u << (g.cells[cell] - 1);
    return d;
}

std::optional<DomainSet> propagate(const DomainSet& input) {
    const Units& u = units_for(input.size);
    DomainSet d = input;
    const int cells = input.size.cell_count();
    const int side = input.size.side();

    bool changed = true;
    while (changed) {
        changed = false;
        // Forward checking: strip fixed digits from peers.
        for (int cell = 0; cell < cells; ++cell) {
            if (!d.is_fixed(cell)) continue;
            const std::uint32_t bit = d.masks[cell];
            for (int peer : u.peers[cell]) {
                if (d.masks[peer] & bit) {
                    d.masks[peer] &= ~bit;
                    if (d.masks[peer] == 0) return std::nullopt;
                    changed = true;
                }
            }
        }
        // Hidden singles: a digit with one remaining spot in a unit goes there.
        for (const auto& unit : u.units) {
            for (int digit = 1; digit <= side; ++digit) {
                const std::uint32_t bit = 1u << (digit - 1);
                int spot = -1, count = 0;
                for (int cell : unit) {
                    if (d.masks[cell] & bit) {
                        spot = cell;
                        if (++count > 1) break;
                    }
                }
                if (count == 0) return std::nullopt;
                if (count == 1 && d.masks[spot] != bit) {
                    d.masks[spot] = bit;
                    changed = true;
                }
            }
        }
    }
    return d;
}

namespace {

// MRV cell choice, ties toward the lowest index; -1 when all fixed.
int pick_cell(const DomainSet& d) {
    int best = -1, best_size = 1 << 30;
    for (int cell = 0; cell < d.size.cell_count(); ++cell) {
        const int s = d.domain_size(cell);
        if (s > 1 && s < best_size) {
            best_size = s;
            best = cell;
        }
    }
    return best;
}

Grid grid_from_fixed(const DomainSet& d) {
    Grid g = Grid::empty(d.size);
    for (int cell = 0; cell < d.size.cell_count(); ++cell)
        g.cells[cell] = d.fixed_digit(cell);
    return g;
}

// Depth-first enumeration; the callback returns false to stop.
bool enumerate(const DomainSet& d, SearchStats* stats, const SearchOptions& opts,
               const std::function<bool(const Grid&)>& on_solution) {
    const int cell = pick_cell(d);
    if (cell < 0) return on_solution(grid_from_fixed(d));

    const int side = d.size.side();
    const std::vector<int>* order = nullptr;
    if (!opts.value_order.empty()) order = &opts.value_order[cell];
    for (int i = 0; i < side; ++i) {
        const int digit = order ? (*order)[i] : i + 1;
        if (!d.allows(cell, digit)) continue;
        if (stats) ++stats->nodes_expanded;
        DomainSet child = d;
        child.masks[cell] = 1u << (digit - 1);
        auto prop = propagate(child);
        if (!prop) {
            if (stats) ++stats->backtracks;
            continue;
        }
        if (!enumerate(*prop, stats, opts, on_solution)) return false;
    }
    return true;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    SearchStats* stats;
    explicit Timer(SearchStats* s) : stats(s) {}
    ~Timer() {
        if (stats)
            stats->wall_time_ms = std::chrono::duration<double, std::milli>(
                                      std::chrono::steady_clock::now() - start)
                                      .count();
    }
};

}  // namespace

std::optional<Grid> solve_csp(const Grid& givens, const DomainSet& domains,
                              SearchStats* stats, const SearchOptions& opts) {
    Timer timer(stats);
    DomainSet d = domains;
    for (int cell = 0; cell < givens.size.cell_count(); ++cell)
        if (givens.cells[cell] != 0) {
            d.masks[cell] &= 1u << (givens.cells[cell] - 1);
            if (d.masks[cell] == 0) return std::nullopt;
        }
    auto prop = propagate(d);
    if (!prop) return std::nullopt;
    std::optional<Grid> found;
    enumerate(*prop, stats, opts, [&](const Grid& g) {
        found = g;
        return false;
    });
    return found;
}

std::optional<Grid> solve_csp(const Grid& givens, SearchStats* stats) {
    return solve_csp(givens, DomainSet::from_grid(givens), stats, {});
}

std::optional<Grid> find_second_solution(const Grid& givens, const Grid& known,
                                         SearchStats* stats) {
    if (!known.is_complete() || !check_rules(known) || !givens.is_restriction_of(known))
        throw std::invalid_argument("known solution does not extend the givens");
    Timer timer(stats);
    auto prop = propagate(DomainSet::from_grid(givens));
    if (!prop) return std::nullopt;
    std::optional<Grid> other;
    enumerate(*prop, stats, {}, [&](const Grid& g) {
        if (g == known) return true;
        other = g;
        return false;
    });
    return other;
}

bool is_unique(const Grid& givens) {
    auto sol = solve_csp(givens);
    if (!sol) throw std::invalid_argument("givens are infeasible");
    return !find_second_solution(givens, *sol).has_value();
}

std::int64_t count_solutions(const Grid& givens, std::int64_t limit) {
    if (limit < 1) throw std::invalid_argument("limit must be >= 1");
    auto prop = propagate(DomainSet::from_grid(givens));
    if (!prop) return 0;
    std::int64_t count = 0;
    enumerate(*prop, nullptr, {}, [&](const Grid&) { return ++count < limit; });
    return count;
}

GeneratedPuzzle generate_puzzle(BoxSize size, int target_givens, std::uint64_t seed) {
    CounterRng rng(seed);
    const int side = size.side();
    const int cells = size.cell_count();

    SearchOptions opts;
    opts.value_order.resize(cells);
    for (int cell = 0; cell < cells; ++cell) {
        auto& order = opts.value_order[cell];
        order.resize(side);
        for (int i = 0; i < side; ++i) order[i] = i + 1;
        CounterRng sub = rng.substream(static_cast<std::uint64_t>(cell), 1);
        sub.shuffle(order);
    }
    auto solution = solve_csp(Grid::empty(size), DomainSet::full(size), nullptr, opts);
    // An empty board is always satisfiable.
    Grid givens = *solution;

    std::vector<int> removal(cells);
    for (int i = 0; i < cells; ++i) removal[i] = i;
    CounterRng order_rng = rng.substream(0, 2);
    order_rng.shuffle(removal);

    int remaining = cells;
    for (int cell : removal) {
        if (remaining <= target_givens) break;
        const int saved = givens.cells[cell];
        givens.cells[cell] = 0;
        if (count_solutions(givens, 2) == 1) {
            --remaining;
        } else {
            givens.cells[cell] = saved;
        }
    }
    return GeneratedPuzzle{givens, *solution, remaining};
}

}  // namespace vizsolve
