#include "vizsolve/simulator.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace vizsolve {

void validate_noise_params(const NoiseParams& params) {
    if (!(params.confidence > 0.0)) throw std::invalid_argument("confidence must be > 0");
    if (!(params.spread >= 0.0)) throw std::invalid_argument("spread must be >= 0");
    if (!(params.corruption >= 0.0 && params.corruption <= 1.0))
        throw std::invalid_argument("corruption must lie in [0, 1]");
}

std::vector<double> simulate_vector(int true_digit, BoxSize size,
                                    const NoiseParams& params, CounterRng& rng) {
    const int side = size.side();
    int peak = true_digit;
    if (params.corruption > 0.0 && rng.next_double() < params.corruption) {
        // Uniformly random wrong class.
        int offset = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(side - 1)));
        peak = 1 + offset + (offset >= true_digit - 1 ? 1 : 0);
    }
    std::vector<double> logits(side);
    for (int k = 0; k < side; ++k) logits[k] = params.spread * rng.next_gaussian();
    logits[peak - 1] += params.confidence;
    return softmax(logits);
}

ProbField simulate_field(const Grid& solution, const Grid& givens,
                         const NoiseParams& params, std::uint64_t instance_salt) {
    validate_noise_params(params);
    if (!givens.is_restriction_of(solution) || !solution.is_complete())
        throw std::invalid_argument("givens do not extend to the solution");
    ProbField field;
    field.size = solution.size;
    const CounterRng base(params.seed);
    for (int cell = 0; cell < solution.size.cell_count(); ++cell) {
        if (givens.cells[cell] == 0) continue;
        CounterRng rng = base.substream(instance_salt, 3)
                             .substream(static_cast<std::uint64_t>(cell), 4);
        field.entries.emplace(
            cell, simulate_vector(solution.cells[cell], solution.size, params, rng));
    }
    return field;
}

double measure_accuracy(BoxSize size, const NoiseParams& params, int samples) {
    validate_noise_params(params);
    const int side = size.side();
    const CounterRng base(params.seed);
    int hits = 0;
    for (int i = 0; i < samples; ++i) {
        const int truth = i % side + 1;
        CounterRng rng = base.substream(static_cast<std::uint64_t>(i), 5);
        const auto probs = simulate_vector(truth, size, params, rng);
        if (argmax_digit(probs) == truth) ++hits;
    }
    return static_cast<double>(hits) / samples;
}

NoiseParams tune_to_accuracy(double target, BoxSize size, double spread,
                             double corruption, std::uint64_t seed, double tolerance) {
    const int side = size.side();
    if (!(target > 1.0 / side && target < 1.0))
        throw std::invalid_argument("target accuracy out of range");

    NoiseParams params{1.0, spread, corruption, seed};
    auto acc_at = [&](double confidence) {
        params.confidence = confidence;
        return measure_accuracy(size, params);
    };

    double lo = 1e-6, hi = 64.0;
    if (acc_at(hi) + tolerance < target)
        throw std::invalid_argument("target accuracy unachievable with this corruption");
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double acc = acc_at(mid);
        if (std::abs(acc - target) <= tolerance) {
            params.confidence = mid;
            return params;
        }
        (acc < target ? lo : hi) = mid;
    }
    throw std::runtime_error("accuracy tuning did not converge");
}

LogitField parse_logits(const std::string& text) {
    LogitField field;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line);
        LogitRecord rec;
        rec.id = j.at("id").get<std::string>();
        rec.label = j.at("label").get<int>();
        rec.logits = j.at("logits").get<std::vector<double>>();
        if (field.num_classes == 0) field.num_classes = static_cast<int>(rec.logits.size());
        if (static_cast<int>(rec.logits.size()) != field.num_classes)
            throw std::invalid_argument("inconsistent logit vector length for id " + rec.id);
        if (rec.label < 1 || rec.label > field.num_classes)
            throw std::invalid_argument("label out of range for id " + rec.id);
        field.records.push_back(std::move(rec));
    }
    return field;
}

LogitField load_logits(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_logits(ss.str());
}

ProbField field_from_logits(const LogitField& lf, BoxSize size,
                            const std::map<std::string, int>& cell_mapping) {
    if (lf.num_classes != size.side())
        throw std::invalid_argument("logit vector length does not match board side");
    ProbField field;
    field.size = size;
    for (const auto& rec : lf.records) {
        auto it = cell_mapping.find(rec.id);
        if (it == cell_mapping.end())
            throw std::invalid_argument("no cell mapping for id " + rec.id);
        field.entries.emplace(it->second, softmax(rec.logits));
    }
    validate_prob_field(field);
    return field;
}

}  // namespace vizsolve
