#include "vizsolve/grid.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace vizsolve {

bool Grid::is_restriction_of(const Grid& full) const {
    if (size != full.size) return false;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] != 0 && cells[i] != full.cells[i]) return false;
    return true;
}

Grid Grid::restricted_to(const std::vector<int>& given_cells) const {
    Grid out = Grid::empty(size);
    for (int c : given_cells) out.cells[c] = cells[c];
    return out;
}

std::vector<int> Grid::given_cells() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i] != 0) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> ProbField::given_cells() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& [cell, probs] : entries) out.push_back(cell);
    return out;
}

std::vector<int> CostField::given_cells() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& [cell, costs] : entries) out.push_back(cell);
    return out;
}

Grid parse_grid(const std::string& text, BoxSize size) {
    if (size.n < 2) throw std::invalid_argument("box size must be >= 2");
    const int side = size.side();
    Grid g = Grid::empty(size);
    std::vector<int> values;
    values.reserve(g.cells.size());

    if (side <= 9) {
        for (char ch : text) {
            if (std::isspace(static_cast<unsigned char>(ch))) continue;
            if (ch == '.' || ch == '0') {
                values.push_back(0);
            } else if (ch >= '1' && ch <= '9') {
                const int v = ch - '0';
                if (v > side)
                    throw std::invalid_argument("digit out of range: " + std::string(1, ch));
                values.push_back(v);
            } else {
                throw std::invalid_argument("unexpected character: " + std::string(1, ch));
            }
        }
    } else {
        std::string cleaned;
        for (char ch : text)
            if (!std::isspace(static_cast<unsigned char>(ch))) cleaned.push_back(ch);
        std::stringstream ss(cleaned);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok == ".") {
                values.push_back(0);
                continue;
            }
            std::size_t pos = 0;
            const int v = std::stoi(tok, &pos);
            if (pos != tok.size() || v < 0 || v > side)
                throw std::invalid_argument("bad token: " + tok);
            values.push_back(v);
        }
    }

    if (static_cast<int>(values.size()) != size.cell_count())
        throw std::invalid_argument("expected " + std::to_string(size.cell_count()) +
                                    " cells, got " + std::to_string(values.size()));
    g.cells = std::move(values);
    return g;
}

std::string serialize_grid(const Grid& g) {
    const int side = g.size.side();
    std::string out;
    if (side <= 9) {
        out.reserve(g.cells.size());
        for (int v : g.cells) out.push_back(v == 0 ? '.' : static_cast<char>('0' + v));
    } else {
        for (std::size_t i = 0; i < g.cells.size(); ++i) {
            if (i) out.push_back(',');
            out += std::to_string(g.cells[i]);
        }
    }
    return out;
}

bool check_rules(const Grid& g) {
    const int side = g.size.side();
    const int n = g.size.n;
    auto scan = [&](auto cell_of) {
        for (int u = 0; u < side; ++u) {
            unsigned seen = 0;
            for (int p = 0; p < side; ++p) {
                const int v = g.cells[cell_of(u, p)];
                if (v == 0) continue;
                const unsigned bit = 1u << (v - 1);
                if (seen & bit) return false;
                seen |= bit;
            }
        }
        return true;
    };
    const bool rows = scan([&](int r, int c) { return r * side + c; });
    const bool cols = scan([&](int c, int r) { return r * side + c; });
    const bool boxes = scan([&](int b, int p) {
        const int r = (b / n) * n + p / n;
        const int c = (b % n) * n + p % n;
        return r * side + c;
    });
    return rows && cols && boxes;
}

void validate_prob_field(ProbField& p) {
    const int side = p.size.side();
    if (p.entries.empty()) throw std::invalid_argument("probability field has no givens");
    for (auto& [cell, probs] : p.entries) {
        if (cell < 0 || cell >= p.size.cell_count())
            throw std::invalid_argument("given cell index out of range");
        if (static_cast<int>(probs.size()) != side)
            throw std::invalid_argument("probability vector has wrong length");
        double sum = 0.0;
        for (double q : probs) {
            if (!(q >= 0.0 && q <= 1.0))
                throw std::invalid_argument("probability outside [0, 1]");
            sum += q;
        }
        if (std::abs(sum - 1.0) > 1e-6)
            throw std::invalid_argument("probability vector does not sum to 1");
        for (double& q : probs) q /= sum;
    }
}

CostField to_cost_field(const ProbField& p, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw std::invalid_argument("epsilon must lie in (0, 1)");
    CostField c;
    c.size = p.size;
    for (const auto& [cell, probs] : p.entries) {
        std::vector<double> costs(probs.size());
        for (std::size_t k = 0; k < probs.size(); ++k)
            costs[k] = -std::log(std::max(probs[k], epsilon));
        c.entries.emplace(cell, std::move(costs));
    }
    return c;
}

int argmax_digit(const std::vector<double>& probs) {
    int best = 1;
    for (int k = 2; k <= static_cast<int>(probs.size()); ++k)
        if (probs[k - 1] > probs[best - 1]) best = k;
    return best;
}

int argmin_digit(const std::vector<double>& costs) {
    int best = 1;
    for (int k = 2; k <= static_cast<int>(costs.size()); ++k)
        if (costs[k - 1] < costs[best - 1]) best = k;
    return best;
}

}  // namespace vizsolve
