#include "vizsolve/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vizsolve {

nlohmann::json prob_field_to_json(const ProbField& p) {
    nlohmann::json givens = nlohmann::json::array();
    for (const auto& [cell, probs] : p.entries)
        givens.push_back({{"cell", cell}, {"probs", probs}});
    return {{"n", p.size.n}, {"givens", std::move(givens)}};
}

ProbField prob_field_from_json(const nlohmann::json& j) {
    ProbField p;
    p.size = BoxSize{j.at("n").get<int>()};
    for (const auto& entry : j.at("givens"))
        p.entries.emplace(entry.at("cell").get<int>(),
                          entry.at("probs").get<std::vector<double>>());
    validate_prob_field(p);
    return p;
}

std::string dataset_to_jsonl(const std::vector<Instance>& instances) {
    std::string out;
    for (const auto& inst : instances) {
        nlohmann::json j = {{"puzzle", serialize_grid(inst.puzzle)},
                            {"solution", serialize_grid(inst.solution)},
                            {"seed", inst.seed}};
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Instance> dataset_from_jsonl(const std::string& text, BoxSize size) {
    std::vector<Instance> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line);
        Instance inst;
        inst.puzzle = parse_grid(j.at("puzzle").get<std::string>(), size);
        inst.solution = parse_grid(j.at("solution").get<std::string>(), size);
        inst.seed = j.at("seed").get<std::uint64_t>();
        out.push_back(std::move(inst));
    }
    return out;
}

std::string fields_to_jsonl(const std::vector<ProbField>& fields) {
    std::string out;
    for (const auto& f : fields) {
        out += prob_field_to_json(f).dump();
        out += '\n';
    }
    return out;
}

std::vector<ProbField> fields_from_jsonl(const std::string& text) {
    std::vector<ProbField> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(prob_field_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

nlohmann::json outcome_to_json(const SolveOutcome& out) {
    nlohmann::json j;
    j["solution"] = out.solution ? nlohmann::json(serialize_grid(*out.solution))
                                 : nlohmann::json(nullptr);
    j["objective"] = out.objective ? nlohmann::json(*out.objective) : nlohmann::json(nullptr);
    j["nodes"] = out.stats.nodes_expanded;
    j["nogoods"] = out.nogoods_used;
    j["time_ms"] = out.stats.wall_time_ms;
    return j;
}

nlohmann::json scaling_params_to_json(const ScalingParams& p) {
    switch (p.kind) {
        case ScalingKind::temperature:
            return {{"kind", "temperature"}, {"T", p.temperature}};
        case ScalingKind::vector:
            return {{"kind", "vector"}, {"w", p.w}, {"b", p.b}};
        case ScalingKind::matrix:
            return {{"kind", "matrix"}, {"W", p.W}, {"b", p.b}};
    }
    throw std::logic_error("unknown scaling kind");
}

ScalingParams scaling_params_from_json(const nlohmann::json& j) {
    ScalingParams p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "temperature") {
        p.kind = ScalingKind::temperature;
        p.temperature = j.at("T").get<double>();
        if (p.temperature <= 0.0) throw std::invalid_argument("temperature must be > 0");
    } else if (kind == "vector") {
        p.kind = ScalingKind::vector;
        p.w = j.at("w").get<std::vector<double>>();
        p.b = j.at("b").get<std::vector<double>>();
    } else if (kind == "matrix") {
        p.kind = ScalingKind::matrix;
        p.W = j.at("W").get<std::vector<std::vector<double>>>();
        p.b = j.at("b").get<std::vector<double>>();
    } else {
        throw std::invalid_argument("unknown scaling kind: " + kind);
    }
    return p;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace vizsolve
