#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vizsolve/csp.hpp"
#include "vizsolve/io.hpp"
#include "vizsolve/metrics.hpp"

using namespace vizsolve;

namespace {

std::vector<ProbField> simulate_all(const std::vector<Instance>& dataset,
                                    const NoiseParams& params) {
    std::vector<ProbField> fields;
    fields.reserve(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        fields.push_back(simulate_field(dataset[i].solution, dataset[i].puzzle, params, i));
    return fields;
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-")
        std::cout << content;
    else
        write_file(path, content);
}

std::string sweep_csv(const std::vector<MetricsReport>& sweep, bool timing) {
    std::string out = "k,img_accuracy,cell_accuracy,grid_accuracy,failure_rate";
    if (timing) out += ",mean_time_ms";
    out += "\n";
    for (const auto& r : sweep) {
        out += std::to_string(r.top_k);
        out += "," + nlohmann::json(r.img_accuracy).dump();
        out += "," + nlohmann::json(r.cell_accuracy).dump();
        out += "," + nlohmann::json(r.grid_accuracy).dump();
        out += "," + nlohmann::json(r.failure_rate).dump();
        if (timing) out += "," + nlohmann::json(r.mean_time_ms).dump();
        out += "\n";
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint inference over probabilistic grid classifiers"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a dataset of unique-solution puzzles");
    int gen_n = 3, gen_count = 200, gen_givens = 36;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--n", gen_n, "Box edge (board is n^2 x n^2)");
    gen->add_option("--count", gen_count, "Number of instances");
    gen->add_option("--givens", gen_givens, "Target number of givens");
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--out", gen_out, "Output dataset (JSON lines)");

    // perturb
    auto* perturb = app.add_subcommand("perturb", "Produce probability fields for a dataset");
    std::string pert_dataset, pert_out, pert_logits;
    int pert_n = 3;
    double pert_accuracy = -1.0, pert_confidence = -1.0, pert_spread = 1.0,
           pert_corruption = 0.0;
    std::uint64_t pert_seed = 0;
    perturb->add_option("--dataset", pert_dataset, "Dataset file")->required();
    perturb->add_option("--n", pert_n, "Box edge");
    perturb->add_option("--accuracy", pert_accuracy, "Tune simulator to this top-1 accuracy");
    perturb->add_option("--confidence", pert_confidence, "Explicit confidence parameter");
    perturb->add_option("--spread", pert_spread, "Logit noise sigma");
    perturb->add_option("--corruption", pert_corruption, "Peak corruption probability");
    perturb->add_option("--logits", pert_logits,
                        "Logit file (JSON lines, ids of the form '<instance>:<cell>')");
    perturb->add_option("--seed", pert_seed, "Simulator seed");
    perturb->add_option("--out", pert_out, "Output fields (JSON lines)");

    // solve
    auto* solve = app.add_subcommand("solve", "Solve a single instance from a field file");
    std::string solve_field, solve_method = "hybrid1";
    int solve_k = 0;
    double solve_eps = 1e-12;
    solve->add_option("--field", solve_field, "ProbField JSON file")->required();
    solve->add_option("--method", solve_method, "baseline|hybrid1|hybrid2");
    solve->add_option("--top-k", solve_k, "Domain restriction (default: all digits)");
    solve->add_option("--epsilon", solve_eps, "Probability clamp");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a method over a dataset");
    std::string eval_dataset, eval_fields, eval_method = "hybrid1", eval_report = "json",
                eval_out;
    int eval_n = 3, eval_k = 0, eval_threads = 0;
    double eval_eps = 1e-12;
    bool eval_timing = false;
    eval->add_option("--dataset", eval_dataset)->required();
    eval->add_option("--fields", eval_fields)->required();
    eval->add_option("--n", eval_n, "Box edge");
    eval->add_option("--method", eval_method, "baseline|hybrid1|hybrid2");
    eval->add_option("--top-k", eval_k, "Domain restriction (default: all digits)");
    eval->add_option("--report", eval_report, "json|csv");
    eval->add_option("--out", eval_out, "Report file (default: stdout)");
    eval->add_option("--threads", eval_threads, "Worker threads (0 = auto)");
    eval->add_option("--epsilon", eval_eps, "Probability clamp");
    eval->add_flag("--timing", eval_timing, "Include wall-clock fields in the report");

    // sweep-topk
    auto* sweepk = app.add_subcommand("sweep-topk", "Evaluate for every k = 1..n^2");
    std::string sk_dataset, sk_fields, sk_method = "hybrid2", sk_out;
    int sk_n = 3, sk_threads = 0;
    bool sk_timing = false;
    sweepk->add_option("--dataset", sk_dataset)->required();
    sweepk->add_option("--fields", sk_fields)->required();
    sweepk->add_option("--n", sk_n, "Box edge");
    sweepk->add_option("--method", sk_method, "baseline|hybrid1|hybrid2");
    sweepk->add_option("--out", sk_out, "CSV output (default: stdout)");
    sweepk->add_option("--threads", sk_threads, "Worker threads (0 = auto)");
    sweepk->add_flag("--timing", sk_timing, "Include mean solve time per k");

    // sweep-strength
    auto* sweeps = app.add_subcommand("sweep-strength",
                                      "Compare methods across classifier accuracies");
    std::string ss_dataset, ss_targets = "0.88,0.9475,0.994", ss_out;
    int ss_n = 3, ss_threads = 0;
    double ss_spread = 1.0, ss_corruption = 0.0;
    std::uint64_t ss_seed = 0;
    sweeps->add_option("--dataset", ss_dataset)->required();
    sweeps->add_option("--targets", ss_targets, "Comma-separated accuracy targets");
    sweeps->add_option("--n", ss_n, "Box edge");
    sweeps->add_option("--spread", ss_spread, "Logit noise sigma");
    sweeps->add_option("--corruption", ss_corruption, "Peak corruption probability");
    sweeps->add_option("--seed", ss_seed, "Simulator seed");
    sweeps->add_option("--out", ss_out, "CSV output (default: stdout)");
    sweeps->add_option("--threads", ss_threads, "Worker threads (0 = auto)");

    // calibrate
    auto* calib = app.add_subcommand("calibrate", "Fit a scaling transform on logits");
    std::string cal_kind = "temperature", cal_logits, cal_out;
    calib->add_option("--kind", cal_kind, "temperature|vector|matrix");
    calib->add_option("--logits", cal_logits, "Validation logit file")->required();
    calib->add_option("--out", cal_out, "Fitted params JSON (default: stdout)");

    // curve
    auto* curve = app.add_subcommand("curve", "Reliability curve from logits");
    std::string cv_logits, cv_params, cv_out;
    int cv_bins = 15;
    curve->add_option("--logits", cv_logits, "Logit file")->required();
    curve->add_option("--params", cv_params, "Optional fitted scaling params JSON");
    curve->add_option("--bins", cv_bins, "Equal-count bins");
    curve->add_option("--out", cv_out, "CSV output (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            std::vector<Instance> instances;
            for (int i = 0; i < gen_count; ++i) {
                const std::uint64_t seed = CounterRng::mix(gen_seed, static_cast<std::uint64_t>(i));
                const auto puz = generate_puzzle(BoxSize{gen_n}, gen_givens, seed);
                instances.push_back({puz.givens, puz.solution, seed});
            }
            emit(gen_out, dataset_to_jsonl(instances));
        } else if (*perturb) {
            const auto dataset =
                dataset_from_jsonl(read_file(pert_dataset), BoxSize{pert_n});
            std::vector<ProbField> fields;
            if (!pert_logits.empty()) {
                const auto lf = load_logits(pert_logits);
                // Split records per instance on the "<instance>:<cell>" id convention.
                std::vector<std::map<std::string, int>> mappings(dataset.size());
                std::vector<LogitField> per_instance(dataset.size());
                for (const auto& rec : lf.records) {
                    const auto colon = rec.id.find(':');
                    if (colon == std::string::npos)
                        throw std::invalid_argument("logit id is not '<instance>:<cell>': " +
                                                    rec.id);
                    const std::size_t inst = std::stoul(rec.id.substr(0, colon));
                    if (inst >= dataset.size())
                        throw std::invalid_argument("logit id references missing instance: " +
                                                    rec.id);
                    mappings[inst][rec.id] = std::stoi(rec.id.substr(colon + 1));
                    per_instance[inst].num_classes = lf.num_classes;
                    per_instance[inst].records.push_back(rec);
                }
                for (std::size_t i = 0; i < dataset.size(); ++i)
                    fields.push_back(
                        field_from_logits(per_instance[i], BoxSize{pert_n}, mappings[i]));
            } else {
                NoiseParams params{pert_confidence, pert_spread, pert_corruption, pert_seed};
                if (pert_accuracy > 0.0)
                    params = tune_to_accuracy(pert_accuracy, BoxSize{pert_n}, pert_spread,
                                              pert_corruption, pert_seed);
                else if (pert_confidence <= 0.0)
                    throw std::invalid_argument(
                        "perturb needs --accuracy, --confidence or --logits");
                fields = simulate_all(dataset, params);
            }
            emit(pert_out, fields_to_jsonl(fields));
        } else if (*solve) {
            auto field = prob_field_from_json(nlohmann::json::parse(read_file(solve_field)));
            const Method method = method_from_string(solve_method);
            const int k = solve_k > 0 ? solve_k : field.size.side();
            SolveOutcome out;
            switch (method) {
                case Method::baseline: out = solve_baseline(field); break;
                case Method::hybrid1:
                    out = solve_hybrid1(to_cost_field(field, solve_eps), k);
                    break;
                case Method::hybrid2:
                    out = solve_hybrid2(to_cost_field(field, solve_eps), k);
                    break;
            }
            std::cout << outcome_to_json(out).dump(2) << "\n";
        } else if (*eval) {
            const auto dataset = dataset_from_jsonl(read_file(eval_dataset), BoxSize{eval_n});
            const auto fields = fields_from_jsonl(read_file(eval_fields));
            const Method method = method_from_string(eval_method);
            const int k = eval_k > 0 ? eval_k : BoxSize{eval_n}.side();
            EvalOptions opts;
            opts.epsilon = eval_eps;
            opts.threads = eval_threads;
            const auto report = evaluate(dataset, fields, method, k, opts);
            if (eval_report == "json")
                emit(eval_out, report_to_json(report, eval_timing).dump(2) + "\n");
            else if (eval_report == "csv")
                emit(eval_out, report_to_csv(report, eval_timing));
            else
                throw std::invalid_argument("unknown report format: " + eval_report);
        } else if (*sweepk) {
            const auto dataset = dataset_from_jsonl(read_file(sk_dataset), BoxSize{sk_n});
            const auto fields = fields_from_jsonl(read_file(sk_fields));
            EvalOptions opts;
            opts.threads = sk_threads;
            const auto sweep =
                topk_sweep(dataset, fields, method_from_string(sk_method), opts);
            emit(sk_out, sweep_csv(sweep, sk_timing));
        } else if (*sweeps) {
            const auto dataset = dataset_from_jsonl(read_file(ss_dataset), BoxSize{ss_n});
            std::vector<double> targets;
            std::stringstream ss(ss_targets);
            std::string tok;
            while (std::getline(ss, tok, ',')) targets.push_back(std::stod(tok));
            EvalOptions opts;
            opts.threads = ss_threads;
            const auto entries = classifier_strength_sweep(dataset, targets, ss_spread,
                                                           ss_corruption, ss_seed, opts);
            std::string out =
                "target,measured,method,img_accuracy,cell_accuracy,grid_accuracy,"
                "failure_rate\n";
            for (const auto& e : entries) {
                const std::pair<const char*, const MetricsReport*> rows[] = {
                    {"baseline", &e.baseline}, {"hybrid1", &e.hybrid1}, {"hybrid2", &e.hybrid2}};
                for (const auto& [name, r] : rows) {
                    out += nlohmann::json(e.target_accuracy).dump();
                    out += "," + nlohmann::json(e.measured_accuracy).dump();
                    out += "," + std::string(name);
                    out += "," + nlohmann::json(r->img_accuracy).dump();
                    out += "," + nlohmann::json(r->cell_accuracy).dump();
                    out += "," + nlohmann::json(r->grid_accuracy).dump();
                    out += "," + nlohmann::json(r->failure_rate).dump();
                    out += "\n";
                }
            }
            emit(ss_out, out);
        } else if (*calib) {
            const auto logits = load_logits(cal_logits);
            ScalingKind kind;
            if (cal_kind == "temperature") kind = ScalingKind::temperature;
            else if (cal_kind == "vector") kind = ScalingKind::vector;
            else if (cal_kind == "matrix") kind = ScalingKind::matrix;
            else throw std::invalid_argument("unknown scaling kind: " + cal_kind);
            const auto fit = fit_scaling(logits, kind);
            nlohmann::json j = scaling_params_to_json(fit.params);
            j["validation_nll"] = fit.final_nll;
            j["iterations"] = fit.iterations;
            emit(cal_out, j.dump(2) + "\n");
        } else if (*curve) {
            const auto logits = load_logits(cv_logits);
            ScalingParams params =
                ScalingParams::identity(ScalingKind::temperature, logits.num_classes);
            if (!cv_params.empty())
                params = scaling_params_from_json(nlohmann::json::parse(read_file(cv_params)));
            std::vector<std::pair<std::vector<double>, int>> predictions;
            for (const auto& rec : logits.records)
                predictions.emplace_back(apply_scaling(rec.logits, params), rec.label);
            const auto bins = reliability_curve(predictions, cv_bins);
            std::string out = "bin,mean_predicted,accuracy,count\n";
            for (std::size_t i = 0; i < bins.size(); ++i) {
                out += std::to_string(i);
                out += "," + nlohmann::json(bins[i].mean_predicted).dump();
                out += "," + nlohmann::json(bins[i].accuracy).dump();
                out += "," + std::to_string(bins[i].count) + "\n";
            }
            emit(cv_out, out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
