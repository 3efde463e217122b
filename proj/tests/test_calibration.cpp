#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "vizsolve/calibration.hpp"
#include "vizsolve/rng.hpp"

using namespace vizsolve;

namespace {

// Synthetic logits equal to scale * log(posterior) with labels drawn from
// the posterior itself: the NLL minimizer of temperature scaling is then
// T = scale.
LogitField posterior_logits(int num_classes, int records, double scale,
                            std::uint64_t seed) {
    LogitField field;
    field.num_classes = num_classes;
    CounterRng rng(seed);
    for (int i = 0; i < records; ++i) {
        std::vector<double> posterior(num_classes);
        double sum = 0.0;
        for (double& p : posterior) {
            p = 0.05 + rng.next_double();
            sum += p;
        }
        for (double& p : posterior) p /= sum;

        int label = num_classes;
        double u = rng.next_double();
        for (int k = 0; k < num_classes; ++k) {
            u -= posterior[k];
            if (u <= 0.0) {
                label = k + 1;
                break;
            }
        }
        LogitRecord rec;
        rec.id = std::to_string(i);
        rec.label = label;
        rec.logits.resize(num_classes);
        for (int k = 0; k < num_classes; ++k)
            rec.logits[k] = scale * std::log(posterior[k]);
        field.records.push_back(std::move(rec));
    }
    return field;
}

LogitField random_logits(int num_classes, int records, std::uint64_t seed) {
    LogitField field;
    field.num_classes = num_classes;
    CounterRng rng(seed);
    for (int i = 0; i < records; ++i) {
        LogitRecord rec;
        rec.id = std::to_string(i);
        rec.label = 1 + static_cast<int>(rng.next_below(num_classes));
        rec.logits.resize(num_classes);
        for (double& z : rec.logits) z = 2.0 * rng.next_gaussian();
        field.records.push_back(std::move(rec));
    }
    return field;
}

}  // namespace

TEST_CASE("softmax of all-zero logits is uniform") {
    const auto p = softmax(std::vector<double>(9, 0.0));
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 9).epsilon(1e-12));
}

TEST_CASE("softmax survives large logits") {
    std::vector<double> z(9, 0.0);
    z[0] = 1000.0;
    const auto p = softmax(z);
    CHECK(p[0] == doctest::Approx(1.0));
    double sum = 0.0;
    for (double v : p) {
        CHECK(std::isfinite(v));
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("softmax on a 3-class toy") {
    const auto p = softmax({std::log(1.0), std::log(2.0), std::log(3.0)});
    CHECK(p[0] == doctest::Approx(1.0 / 6).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(2.0 / 6).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(3.0 / 6).epsilon(1e-12));
}

TEST_CASE("softmax is shift invariant and rejects non-finite input") {
    CounterRng rng(1);
    std::vector<double> z(9);
    for (double& v : z) v = rng.next_gaussian();
    const auto a = softmax(z);
    for (double& v : z) v += 17.5;
    const auto b = softmax(z);
    for (int k = 0; k < 9; ++k) CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
    z[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS(softmax(z));
}

TEST_CASE("nll of confident correct predictions approaches zero") {
    LogitField field;
    field.num_classes = 9;
    for (int i = 0; i < 5; ++i) {
        LogitRecord rec;
        rec.label = i + 1;
        rec.logits.assign(9, 0.0);
        rec.logits[i] = 50.0;
        field.records.push_back(rec);
    }
    CHECK(nll(field, ScalingParams::identity(ScalingKind::temperature, 9)) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("nll of uniform predictions is log 9") {
    LogitField field;
    field.num_classes = 9;
    LogitRecord rec;
    rec.label = 3;
    rec.logits.assign(9, 1.0);
    field.records.push_back(rec);
    CHECK(nll(field, ScalingParams::identity(ScalingKind::matrix, 9)) ==
          doctest::Approx(std::log(9.0)).epsilon(1e-12));
    CHECK_THROWS(nll(LogitField{9, {}}, ScalingParams::identity(ScalingKind::matrix, 9)));
}

TEST_CASE("identity params of every kind reproduce softmax") {
    CounterRng rng(2);
    std::vector<double> z(9);
    for (double& v : z) v = rng.next_gaussian();
    const auto expected = softmax(z);
    for (ScalingKind kind :
         {ScalingKind::temperature, ScalingKind::vector, ScalingKind::matrix}) {
        const auto p = apply_scaling(z, ScalingParams::identity(kind, 9));
        for (int k = 0; k < 9; ++k) CHECK(p[k] == doctest::Approx(expected[k]).epsilon(1e-12));
    }
}

TEST_CASE("temperature scaling flattens but preserves ranking") {
    std::vector<double> z(9, 0.0);
    z[0] = 2.0;
    ScalingParams params = ScalingParams::identity(ScalingKind::temperature, 9);
    const auto p1 = apply_scaling(z, params);
    params.temperature = 2.0;
    const auto p2 = apply_scaling(z, params);
    CHECK(p2[0] < p1[0]);
    CHECK(argmax_digit(p2) == argmax_digit(p1));
    params.temperature = -1.0;
    CHECK_THROWS(apply_scaling(z, params));
}

TEST_CASE("apply_scaling rejects shape mismatches") {
    ScalingParams p = ScalingParams::identity(ScalingKind::vector, 4);
    CHECK_THROWS(apply_scaling(std::vector<double>(9, 0.0), p));
}

TEST_CASE("analytic gradients match central finite differences") {
    for (int trial = 0; trial < 20; ++trial) {
        const int C = 3 + trial % 3;
        const auto field = random_logits(C, 8, 7000 + trial);
        const ScalingKind kind = static_cast<ScalingKind>(trial % 3);

        // Random parameter point near identity.
        CounterRng rng(9000 + trial);
        ScalingParams params = ScalingParams::identity(kind, C);
        params.temperature += 0.3 * rng.next_double();
        for (auto& v : params.w) v += 0.2 * rng.next_gaussian();
        for (auto& row : params.W)
            for (auto& v : row) v += 0.2 * rng.next_gaussian();
        for (auto& v : params.b) v += 0.2 * rng.next_gaussian();

        const auto grad = nll_gradient(field, params);

        // Finite differences over the flattened parameters.
        const double h = 1e-6;
        auto perturb = [&](int index, double delta) {
            ScalingParams q = params;
            int i = index;
            switch (kind) {
                case ScalingKind::temperature:
                    q.temperature += delta;
                    break;
                case ScalingKind::vector:
                    if (i < C) q.w[i] += delta;
                    else q.b[i - C] += delta;
                    break;
                case ScalingKind::matrix:
                    if (i < C * C) q.W[i / C][i % C] += delta;
                    else q.b[i - C * C] += delta;
                    break;
            }
            return q;
        };
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double fd = (nll(field, perturb(static_cast<int>(i), h)) -
                               nll(field, perturb(static_cast<int>(i), -h))) /
                              (2 * h);
            const double scale = std::max({std::abs(grad[i]), std::abs(fd), 1e-8});
            CHECK(std::abs(grad[i] - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("fit_scaling recovers T near 1 on calibrated logits") {
    const auto field = posterior_logits(9, 4000, 1.0, 31);
    const auto fit = fit_scaling(field, ScalingKind::temperature);
    CHECK(fit.params.temperature == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("fit_scaling recovers T near 3 on overconfident logits") {
    const auto field = posterior_logits(9, 4000, 3.0, 32);
    const auto fit = fit_scaling(field, ScalingKind::temperature);
    CHECK(fit.params.temperature > 2.7);
    CHECK(fit.params.temperature < 3.3);
}

TEST_CASE("fit_scaling never does worse than identity") {
    for (int trial = 0; trial < 3; ++trial) {
        const auto field = random_logits(9, 200, 40 + trial);
        for (ScalingKind kind :
             {ScalingKind::temperature, ScalingKind::vector, ScalingKind::matrix}) {
            const auto fit = fit_scaling(field, kind);
            const double identity_nll =
                nll(field, ScalingParams::identity(kind, field.num_classes));
            CHECK(fit.final_nll <= identity_nll + 1e-9);
            CHECK(nll(field, fit.params) == doctest::Approx(fit.final_nll));
        }
    }
}

TEST_CASE("fit_scaling validates its input") {
    LogitField single;
    single.num_classes = 4;
    LogitRecord rec;
    rec.label = 1;
    rec.logits.assign(4, 0.0);
    single.records.push_back(rec);
    CHECK_THROWS(fit_scaling(single, ScalingKind::temperature));  // one label only
    CHECK_THROWS(fit_scaling(LogitField{4, {}}, ScalingKind::temperature));
}

TEST_CASE("reliability_curve on one-hot always-correct predictions") {
    std::vector<std::pair<std::vector<double>, int>> preds;
    for (int i = 0; i < 30; ++i) {
        std::vector<double> p(4, 0.0);
        p[i % 4] = 1.0;
        preds.emplace_back(p, i % 4 + 1);
    }
    const auto bins = reliability_curve(preds, 15);
    REQUIRE(bins.size() == 15);
    const auto& top = bins.back();
    CHECK(top.mean_predicted == doctest::Approx(1.0));
    CHECK(top.accuracy == doctest::Approx(1.0));
    CHECK_THROWS(reliability_curve({}, 15));
    CHECK_THROWS(reliability_curve(preds, 0));
}

TEST_CASE("reliability_curve tracks the diagonal on calibrated data") {
    const auto field = posterior_logits(9, 3000, 1.0, 77);
    std::vector<std::pair<std::vector<double>, int>> preds;
    for (const auto& rec : field.records) preds.emplace_back(softmax(rec.logits), rec.label);
    const auto bins = reliability_curve(preds, 15);
    for (const auto& bin : bins) {
        REQUIRE(bin.count > 0);
        CHECK(std::abs(bin.mean_predicted - bin.accuracy) <=
              3.0 / std::sqrt(static_cast<double>(bin.count)));
    }
}

TEST_CASE("calibrate_field with identity params is a no-op") {
    ProbField f;
    f.size = BoxSize{3};
    CounterRng rng(5);
    std::vector<double> probs(9);
    double sum = 0.0;
    for (double& p : probs) {
        p = 0.01 + rng.next_double();
        sum += p;
    }
    for (double& p : probs) p /= sum;
    f.entries.emplace(3, probs);
    const auto out =
        calibrate_field(f, ScalingParams::identity(ScalingKind::temperature, 9));
    for (int k = 0; k < 9; ++k)
        CHECK(out.entries.at(3)[k] == doctest::Approx(probs[k]).epsilon(1e-9));
}
