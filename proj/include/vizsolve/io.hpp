#ifndef VIZSOLVE_IO_HPP
#define VIZSOLVE_IO_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "vizsolve/calibration.hpp"
#include "vizsolve/grid.hpp"
#include "vizsolve/joint.hpp"

namespace vizsolve {

// One dataset instance: puzzle givens, reference solution, generator seed.
struct Instance {
    Grid puzzle;
    Grid solution;
    std::uint64_t seed = 0;
};

// {"n": int, "givens": [{"cell": int, "probs": [...]}]}
nlohmann::json prob_field_to_json(const ProbField& p);
ProbField prob_field_from_json(const nlohmann::json& j);

// JSON lines of {"puzzle", "solution", "seed"}.
std::string dataset_to_jsonl(const std::vector<Instance>& instances);
std::vector<Instance> dataset_from_jsonl(const std::string& text, BoxSize size);

// JSON lines, one ProbField object per dataset instance, in order.
std::string fields_to_jsonl(const std::vector<ProbField>& fields);
std::vector<ProbField> fields_from_jsonl(const std::string& text);

// {"solution": <grid text>|null, "objective": real|null, "nodes": int,
//  "nogoods": int, "time_ms": real}
nlohmann::json outcome_to_json(const SolveOutcome& out);

nlohmann::json scaling_params_to_json(const ScalingParams& p);
ScalingParams scaling_params_from_json(const nlohmann::json& j);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace vizsolve

#endif
