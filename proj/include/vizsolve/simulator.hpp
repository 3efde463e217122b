#ifndef VIZSOLVE_SIMULATOR_HPP
#define VIZSOLVE_SIMULATOR_HPP

#include <cstdint>
#include <map>
#include <string>

#include "vizsolve/calibration.hpp"
#include "vizsolve/grid.hpp"
#include "vizsolve/rng.hpp"

namespace vizsolve {

// Synthetic probabilistic classifier profile. Per cell, logits are
// drawn N(0, spread) and `confidence` is added to the peak class: the
// true digit, or with probability `corruption` a uniformly random
// wrong digit.
struct NoiseParams {
    double confidence = 4.0;
    double spread = 1.0;
    double corruption = 0.0;
    std::uint64_t seed = 0;
};

void validate_noise_params(const NoiseParams& params);

// One simulated probability vector; deterministic per rng state.
std::vector<double> simulate_vector(int true_digit, BoxSize size,
                                    const NoiseParams& params, CounterRng& rng);

// One simulated vector per given cell, truth taken from `solution`.
// `instance_salt` separates rng substreams across instances.
ProbField simulate_field(const Grid& solution, const Grid& givens,
                         const NoiseParams& params, std::uint64_t instance_salt = 0);

// Monte Carlo top-1 accuracy of the simulated classifier.
double measure_accuracy(BoxSize size, const NoiseParams& params, int samples = 100000);

// Binary-searches `confidence` until Monte Carlo accuracy is within
// `tolerance` of `target`. Throws when the target is unachievable.
NoiseParams tune_to_accuracy(double target, BoxSize size, double spread,
                             double corruption, std::uint64_t seed,
                             double tolerance = 0.003);

// JSON lines, one {"id", "label", "logits"} object per line.
LogitField load_logits(const std::string& path);
LogitField parse_logits(const std::string& text);

// ProbField via softmax of each mapped record's logits. `cell_mapping`
// maps record id -> cell index and must cover every record used.
ProbField field_from_logits(const LogitField& lf, BoxSize size,
                            const std::map<std::string, int>& cell_mapping);

}  // namespace vizsolve

#endif
