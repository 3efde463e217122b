#ifndef VIZSOLVE_GRID_HPP
#define VIZSOLVE_GRID_HPP

#include <map>
#include <string>
#include <vector>

namespace vizsolve {

// Box edge of a generalized sudoku: the board is side x side with
// side = n*n, digits 1..side. n = 3 is the classic 9x9 puzzle.
struct BoxSize {
    int n;

    int side() const { return n * n; }
    int cell_count() const { return n * n * n * n; }
    bool operator==(const BoxSize&) const = default;
};

// A board of cell values; 0 marks an empty cell. Used both for the
// givens of a puzzle and for complete solutions.
struct Grid {
    BoxSize size{3};
    std::vector<int> cells;  // row-major, length n^4

    static Grid empty(BoxSize size) {
        return Grid{size, std::vector<int>(size.cell_count(), 0)};
    }

    int at(int row, int col) const { return cells[row * size.side() + col]; }
    void set(int row, int col, int v) { cells[row * size.side() + col] = v; }

    bool is_complete() const {
        for (int v : cells)
            if (v == 0) return false;
        return true;
    }

    int given_count() const {
        int c = 0;
        for (int v : cells)
            if (v != 0) ++c;
        return c;
    }

    // true iff every nonzero cell of this grid agrees with `full`.
    bool is_restriction_of(const Grid& full) const;

    // this grid with all cells outside `given_cells` erased.
    Grid restricted_to(const std::vector<int>& given_cells) const;

    std::vector<int> given_cells() const;

    bool operator==(const Grid&) const = default;
};

// Per-given-cell probability vectors over the side() digit classes;
// entry k-1 of a vector holds P(digit = k).
struct ProbField {
    BoxSize size{3};
    std::map<int, std::vector<double>> entries;  // given cell -> probs

    std::vector<int> given_cells() const;
};

// Per-given-cell clamped negative log probabilities, the weights of the
// maximum-likelihood objective.
struct CostField {
    BoxSize size{3};
    std::map<int, std::vector<double>> entries;  // given cell -> costs

    std::vector<int> given_cells() const;
};

// Text format: for side <= 9 one character per cell, '.' or '0' for
// empty; for side > 9 comma-separated decimal integers. Whitespace is
// ignored. serialize_grid emits '.' for empty in the character form and
// 0 in the comma-separated form.
Grid parse_grid(const std::string& text, BoxSize size);
std::string serialize_grid(const Grid& g);

// true iff no row, column or box repeats a nonzero digit.
bool check_rules(const Grid& g);

// Validates ProbField invariants: vectors in [0,1], summing to 1 within
// 1e-6 (renormalized in place), nonempty given set. Throws on violation.
void validate_prob_field(ProbField& p);

// cost[k] = -log(max(p[k], epsilon)); epsilon must lie in (0, 1).
CostField to_cost_field(const ProbField& p, double epsilon = 1e-12);

// Highest-probability digit, ties broken toward the lower digit.
int argmax_digit(const std::vector<double>& probs);

// Lowest-cost digit, ties broken toward the lower digit.
int argmin_digit(const std::vector<double>& costs);

}  // namespace vizsolve

#endif
