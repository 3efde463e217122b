#include "vizsolve/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace vizsolve {

ScalingParams ScalingParams::identity(ScalingKind kind, int num_classes) {
    ScalingParams p;
    p.kind = kind;
    switch (kind) {
        case ScalingKind::temperature:
            p.temperature = 1.0;
            break;
        case ScalingKind::vector:
            p.w.assign(num_classes, 1.0);
            p.b.assign(num_classes, 0.0);
            break;
        case ScalingKind::matrix:
            p.W.assign(num_classes, std::vector<double>(num_classes, 0.0));
            for (int i = 0; i < num_classes; ++i) p.W[i][i] = 1.0;
            p.b.assign(num_classes, 0.0);
            break;
    }
    return p;
}

std::vector<double> softmax(const std::vector<double>& logits) {
    if (logits.empty()) throw std::invalid_argument("empty logit vector");
    double mx = -std::numeric_limits<double>::infinity();
    for (double z : logits) {
        if (!std::isfinite(z)) throw std::invalid_argument("non-finite logit");
        mx = std::max(mx, z);
    }
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

namespace {

std::vector<double> transform_logits(const std::vector<double>& z, const ScalingParams& p) {
    const std::size_t C = z.size();
    std::vector<double> u(C);
    switch (p.kind) {
        case ScalingKind::temperature:
            if (p.temperature <= 0.0) throw std::invalid_argument("temperature must be > 0");
            for (std::size_t k = 0; k < C; ++k) u[k] = z[k] / p.temperature;
            break;
        case ScalingKind::vector:
            if (p.w.size() != C || p.b.size() != C)
                throw std::invalid_argument("scaling shape mismatch");
            for (std::size_t k = 0; k < C; ++k) u[k] = p.w[k] * z[k] + p.b[k];
            break;
        case ScalingKind::matrix:
            if (p.W.size() != C || p.b.size() != C)
                throw std::invalid_argument("scaling shape mismatch");
            for (std::size_t k = 0; k < C; ++k) {
                if (p.W[k].size() != C) throw std::invalid_argument("scaling shape mismatch");
                double acc = p.b[k];
                for (std::size_t j = 0; j < C; ++j) acc += p.W[k][j] * z[j];
                u[k] = acc;
            }
            break;
    }
    return u;
}

int param_count(ScalingKind kind, int C) {
    switch (kind) {
        case ScalingKind::temperature: return 1;
        case ScalingKind::vector: return 2 * C;
        case ScalingKind::matrix: return C * C + C;
    }
    return 0;
}

std::vector<double> flatten(const ScalingParams& p, int C) {
    std::vector<double> x;
    switch (p.kind) {
        case ScalingKind::temperature:
            x.push_back(p.temperature);
            break;
        case ScalingKind::vector:
            x.insert(x.end(), p.w.begin(), p.w.end());
            x.insert(x.end(), p.b.begin(), p.b.end());
            break;
        case ScalingKind::matrix:
            for (int i = 0; i < C; ++i) x.insert(x.end(), p.W[i].begin(), p.W[i].end());
            x.insert(x.end(), p.b.begin(), p.b.end());
            break;
    }
    return x;
}

ScalingParams unflatten(ScalingKind kind, const std::vector<double>& x, int C) {
    ScalingParams p;
    p.kind = kind;
    switch (kind) {
        case ScalingKind::temperature:
            p.temperature = x[0];
            break;
        case ScalingKind::vector:
            p.w.assign(x.begin(), x.begin() + C);
            p.b.assign(x.begin() + C, x.begin() + 2 * C);
            break;
        case ScalingKind::matrix:
            p.W.assign(C, std::vector<double>(C));
            for (int i = 0; i < C; ++i)
                for (int j = 0; j < C; ++j) p.W[i][j] = x[i * C + j];
            p.b.assign(x.begin() + C * C, x.begin() + C * C + C);
            break;
    }
    return p;
}

}  // namespace

std::vector<double> apply_scaling(const std::vector<double>& logits,
                                  const ScalingParams& params) {
    return softmax(transform_logits(logits, params));
}

double nll(const LogitField& logits, const ScalingParams& params) {
    if (logits.records.empty()) throw std::invalid_argument("empty logit field");
    double total = 0.0;
    for (const auto& rec : logits.records) {
        const auto p = apply_scaling(rec.logits, params);
        // Clamp keeps the loss finite on saturated inputs.
        total += -std::log(std::max(p[rec.label - 1], 1e-300));
    }
    return total / static_cast<double>(logits.records.size());
}

std::vector<double> nll_gradient(const LogitField& logits, const ScalingParams& params) {
    if (logits.records.empty()) throw std::invalid_argument("empty logit field");
    const int C = logits.num_classes;
    std::vector<double> grad(param_count(params.kind, C), 0.0);
    const double inv_n = 1.0 / static_cast<double>(logits.records.size());

    for (const auto& rec : logits.records) {
        const auto p = apply_scaling(rec.logits, params);
        // d(mean NLL)/du_k = (p_k - 1[k == label]) / n
        std::vector<double> g(C);
        for (int k = 0; k < C; ++k)
            g[k] = (p[k] - (k == rec.label - 1 ? 1.0 : 0.0)) * inv_n;

        switch (params.kind) {
            case ScalingKind::temperature: {
                const double T = params.temperature;
                double acc = 0.0;
                for (int k = 0; k < C; ++k) acc += g[k] * rec.logits[k];
                grad[0] += -acc / (T * T);
                break;
            }
            case ScalingKind::vector:
                for (int k = 0; k < C; ++k) {
                    grad[k] += g[k] * rec.logits[k];
                    grad[C + k] += g[k];
                }
                break;
            case ScalingKind::matrix:
                for (int k = 0; k < C; ++k) {
                    for (int j = 0; j < C; ++j) grad[k * C + j] += g[k] * rec.logits[j];
                    grad[C * C + k] += g[k];
                }
                break;
        }
    }
    return grad;
}

FitResult fit_scaling(const LogitField& validation, ScalingKind kind,
                      const FitOptions& opts) {
    if (validation.records.empty()) throw std::invalid_argument("empty validation set");
    std::set<int> labels;
    for (const auto& rec : validation.records) {
        if (rec.label < 1 || rec.label > validation.num_classes)
            throw std::invalid_argument("label out of range");
        if (static_cast<int>(rec.logits.size()) != validation.num_classes)
            throw std::invalid_argument("logit vector length mismatch");
        labels.insert(rec.label);
    }
    if (labels.size() < 2)
        throw std::invalid_argument("validation set needs at least 2 distinct labels");

    const int C = validation.num_classes;
    std::vector<double> x = flatten(ScalingParams::identity(kind, C), C);
    ScalingParams params = unflatten(kind, x, C);
    double f = nll(validation, params);

    FitResult result;
    int iter = 0;
    std::vector<double> prev_x, prev_g;
    for (; iter < opts.max_iterations; ++iter) {
        const std::vector<double> g = nll_gradient(validation, params);
        double gnorm_inf = 0.0, gnorm_sq = 0.0;
        for (double v : g) {
            gnorm_inf = std::max(gnorm_inf, std::abs(v));
            gnorm_sq += v * v;
        }
        if (gnorm_inf < opts.gradient_tolerance) {
            result.converged = true;
            break;
        }
        // Barzilai-Borwein initial step (spectral estimate from the last
        // move), safeguarded by backtracking Armijo (c = 1e-4) so the
        // descent stays monotone.
        double step = 1.0;
        if (!prev_x.empty()) {
            double sy = 0.0, yy = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double s = x[i] - prev_x[i];
                const double y = g[i] - prev_g[i];
                sy += s * y;
                yy += y * y;
            }
            if (sy > 0.0 && yy > 0.0) step = std::clamp(sy / yy, 1e-12, 1e12);
        }
        prev_x = x;
        prev_g = g;
        bool moved = false;
        while (step > 1e-16) {
            std::vector<double> cand = x;
            for (std::size_t i = 0; i < x.size(); ++i) cand[i] -= step * g[i];
            if (kind == ScalingKind::temperature && cand[0] <= 1e-6) {
                step *= 0.5;
                continue;
            }
            const ScalingParams cand_params = unflatten(kind, cand, C);
            const double fc = nll(validation, cand_params);
            if (fc <= f - 1e-4 * step * gnorm_sq) {
                x = std::move(cand);
                params = cand_params;
                f = fc;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;  // no descent step found; gradient is numerically flat
    }
    result.params = params;
    result.final_nll = f;
    result.iterations = iter;
    return result;
}

std::vector<ReliabilityBin> reliability_curve(
    const std::vector<std::pair<std::vector<double>, int>>& predictions, int bins) {
    if (predictions.empty()) throw std::invalid_argument("empty prediction list");
    if (bins < 1) throw std::invalid_argument("bins must be >= 1");

    std::vector<std::pair<double, bool>> pooled;  // (predicted prob, correct class)
    for (const auto& [probs, label] : predictions)
        for (int k = 1; k <= static_cast<int>(probs.size()); ++k)
            pooled.emplace_back(probs[k - 1], k == label);
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    const std::size_t total = pooled.size();
    std::vector<ReliabilityBin> out;
    out.reserve(bins);
    for (int i = 0; i < bins; ++i) {
        const std::size_t lo = total * i / bins;
        const std::size_t hi = total * (i + 1) / bins;
        ReliabilityBin bin;
        bin.count = static_cast<int>(hi - lo);
        if (bin.count > 0) {
            double sum_p = 0.0;
            int hits = 0;
            for (std::size_t j = lo; j < hi; ++j) {
                sum_p += pooled[j].first;
                if (pooled[j].second) ++hits;
            }
            bin.mean_predicted = sum_p / bin.count;
            bin.accuracy = static_cast<double>(hits) / bin.count;
        }
        out.push_back(bin);
    }
    return out;
}

ProbField calibrate_field(const ProbField& field, const ScalingParams& params) {
    ProbField out;
    out.size = field.size;
    for (const auto& [cell, probs] : field.entries) {
        std::vector<double> logits(probs.size());
        for (std::size_t k = 0; k < probs.size(); ++k)
            logits[k] = std::log(std::max(probs[k], 1e-300));
        out.entries.emplace(cell, apply_scaling(logits, params));
    }
    return out;
}

}  // namespace vizsolve
