#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "transnn/dynamics.hpp"
#include "transnn/learn/checkpoint.hpp"
#include "transnn/learn/datasets.hpp"
#include "transnn/learn/experiment.hpp"
#include "transnn/learn/model.hpp"
#include "transnn/learn/train.hpp"
#include "transnn/learn/universal.hpp"

using namespace transnn;
using namespace transnn::learn;

namespace {

constexpr ActivationKind kKinds[] = {ActivationKind::TLogSigmoid, ActivationKind::TSoftAffine,
                                     ActivationKind::TLogSigmoidPlus};

Layer random_layer(std::mt19937_64& rng, std::size_t in, std::size_t out, bool linear = false) {
    Layer l;
    l.a = Matrix(out, in);
    l.w = Matrix(out, in, 1.0);
    l.bias = Vector(out);
    l.linear = linear;
    for (double& v : l.a.data()) v = fixtures::uniform(rng, -1.5, 1.5);
    if (!linear)
        for (double& v : l.w.data()) v = fixtures::uniform(rng, 0.05, 0.95);
    for (double& v : l.bias) v = fixtures::uniform(rng, -1.0, 1.0);
    return l;
}

LayeredTransNN random_model(std::mt19937_64& rng, ActivationKind kind, const std::vector<std::size_t>& sizes,
                            OutputHead head = OutputHead::Identity) {
    std::vector<Layer> layers;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) layers.push_back(random_layer(rng, sizes[k], sizes[k + 1]));
    return LayeredTransNN(std::move(layers), kind, head);
}

Vector random_input(std::mt19937_64& rng, std::size_t n) {
    Vector x(n);
    for (double& v : x) v = (fixtures::uniform(rng) < 0.5 ? -1.0 : 1.0) * fixtures::uniform(rng, 0.2, 2.0);
    return x;
}

// true if every pre-activation feeding a kinked unit stays clear of zero
bool away_from_kink(const LayeredTransNN& m, const Vector& x, double margin) {
    const Tape t = forward(m, x);
    for (std::size_t k = 0; k < m.layers().size(); ++k) {
        if (m.layers()[k].linear) continue;
        for (double v : t.states[k])
            if (std::abs(v) < margin) return false;
    }
    return true;
}

void check_gradients(const LayeredTransNN& m, const Vector& x, const Vector& c) {
    EXPECT_LT(gradcheck::max_relative_error(m, x, c), 1e-5);
}

bool same_parameters(const LayeredTransNN& x, const LayeredTransNN& y) {
    if (x.layers().size() != y.layers().size()) return false;
    for (std::size_t k = 0; k < x.layers().size(); ++k) {
        const Layer& p = x.layers()[k];
        const Layer& q = y.layers()[k];
        if (!(p.a == q.a) || !(p.w == q.w) || p.bias != q.bias) return false;
    }
    return true;
}

}  // namespace

TEST(Forward, FullLevelsMakeSmoothLayersLinear) {
    std::mt19937_64 rng(1);
    for (auto kind : {ActivationKind::TLogSigmoid, ActivationKind::TSoftAffine}) {
        auto m = random_model(rng, kind, {3, 4, 2});
        for (auto& l : m.layers()) l.w = Matrix(l.w.rows(), l.w.cols(), 1.0);
        const Vector x = random_input(rng, 3);
        Vector h = multiply(m.layers()[0].a, x);
        for (std::size_t i = 0; i < h.size(); ++i) h[i] += m.layers()[0].bias[i];
        Vector y = multiply(m.layers()[1].a, h);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += m.layers()[1].bias[i];
        const Vector got = predict(m, x);
        for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(got[i], y[i], 1e-13);
    }
}

TEST(Forward, ZeroLevelsLeaveOnlyBiases) {
    std::mt19937_64 rng(2);
    for (auto kind : kKinds) {
        auto m = random_model(rng, kind, {3, 5, 2});
        for (auto& l : m.layers()) l.w = Matrix(l.w.rows(), l.w.cols(), 0.0);
        const Vector got = predict(m, random_input(rng, 3));
        EXPECT_EQ(got, m.layers()[1].bias);
    }
}

TEST(Forward, SingleHiddenMatchesScalarLoop) {
    std::mt19937_64 rng(3);
    const auto m = make_single_hidden(2, 7, 3, ActivationKind::TLogSigmoid, 0.8, 42);
    const Layer& in = m.layers()[0];
    const Layer& hid = m.layers()[1];
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = random_input(rng, 2);
        const Vector got = predict(m, x);
        for (std::size_t r = 0; r < 3; ++r) {
            oracle::mp sum = 0;
            for (std::size_t i = 0; i < 7; ++i) {
                oracle::mp z = 0.8;
                for (std::size_t d = 0; d < 2; ++d) z += oracle::mp(in.a(i, d)) * x[d];
                sum += oracle::mp(hid.a(r, i)) * oracle::psi(oracle::mp(hid.w(0, i)), z);
            }
            EXPECT_NEAR(got[r], static_cast<double>(sum), 1e-13);
        }
    }
    EXPECT_EQ(m.fixed_bias(), 0.8);
}

TEST(Forward, HeadsAreConsistent) {
    const Vector s{0.3, 1.2, -0.4};
    const Vector ls = apply_head(OutputHead::LogSoftmax, s);
    double total = 0.0;
    for (double v : ls) total += std::exp(v);
    EXPECT_NEAR(total, 1.0, 1e-15);
    EXPECT_NEAR(apply_head(OutputHead::ProbObservation, Vector{std::log(2.0)})[0], 0.5, 1e-15);
    EXPECT_EQ(parse_output_head("prob"), OutputHead::ProbObservation);
    EXPECT_THROW(parse_output_head("softmax"), std::invalid_argument);
}

TEST(Forward, BiasFreeModelIsTheGeneralDynamics) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        auto m = random_model(rng, ActivationKind::TLogSigmoid, {4, 6, 5, 3});
        for (auto& l : m.layers()) std::fill(l.bias.begin(), l.bias.end(), 0.0);
        const Vector x = random_input(rng, 4);
        const auto layers = m.trans_layers();
        Vector want = x;
        for (std::size_t k = 0; k < layers.size(); ++k) want = step_general_info(layers, want, k);
        const Vector got = predict(m, x);
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-14);
    }
}

TEST(Backward, MatchesFiniteDifferences) {
    std::mt19937_64 rng(5);
    for (auto kind : kKinds) {
        int checked = 0;
        while (checked < 20) {
            const auto m = random_model(rng, kind, {3, 4, 3, 2});
            const Vector x = random_input(rng, 3);
            if (kind == ActivationKind::TLogSigmoidPlus && !away_from_kink(m, x, 1e-2)) continue;
            Vector c(2);
            for (double& v : c) v = fixtures::uniform(rng, -1.0, 1.0);
            check_gradients(m, x, c);
            ++checked;
        }
    }
}

TEST(Backward, HeadsAndSharedLevels) {
    std::mt19937_64 rng(6);
    for (auto head : {OutputHead::LogSoftmax, OutputHead::ProbObservation}) {
        auto m = random_model(rng, ActivationKind::TLogSigmoid, {2, 4, 3}, head);
        if (head == OutputHead::ProbObservation) {
            for (auto& l : m.layers()) {
                for (double& v : l.a.data()) v = std::abs(v);
                for (double& v : l.bias) v = std::abs(v);
            }
        }
        check_gradients(m, random_input(rng, 2), Vector{0.3, -0.7, 0.5});
    }
    const auto shared = make_single_hidden(2, 5, 2, ActivationKind::TSoftAffine, 1.0, 9);
    check_gradients(shared, random_input(rng, 2), Vector{1.0, -0.5});
}

TEST(Backward, ZeroCases) {
    std::mt19937_64 rng(7);
    const auto m = random_model(rng, ActivationKind::TLogSigmoid, {3, 4, 2});
    const Tape t = forward(m, random_input(rng, 3));
    const Gradients g = backward(m, t, Vector{0.0, 0.0});
    for (std::size_t k = 0; k < 2; ++k) {
        for (double v : g.a[k].data()) EXPECT_EQ(v, 0.0);
        for (double v : g.w[k].data()) EXPECT_EQ(v, 0.0);
        for (double v : g.bias[k]) EXPECT_EQ(v, 0.0);
    }
    // Psi(w, 0) = 0 for every w, so the level of a link carrying zero has no gradient
    const Vector x{0.0, 1.0, -1.0};
    const Gradients h = backward(m, forward(m, x), Vector{1.0, 1.0});
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(h.w[0](i, 0), 0.0);
    EXPECT_THROW(backward(m, t, Vector{1.0}), std::invalid_argument);
}

TEST(Model, ValidationAndProjection) {
    std::mt19937_64 rng(8);
    auto m = random_model(rng, ActivationKind::TLogSigmoid, {2, 3, 2});
    m.layers()[0].w(0, 0) = 1.7;
    m.layers()[1].w(1, 1) = -0.2;
    m.project();
    EXPECT_EQ(m.layers()[0].w(0, 0), 1.0);
    EXPECT_EQ(m.layers()[1].w(1, 1), 0.0);
    EXPECT_NO_THROW(m.validate());
    EXPECT_THROW(make_single_hidden(1, 3, 1, ActivationKind::TLogSigmoid, 0.0, 1), std::invalid_argument);
    EXPECT_THROW(make_single_hidden(1, 3, 1, ActivationKind::TLogSigmoidPlus, -1.0, 1), std::invalid_argument);
    EXPECT_NO_THROW(make_single_hidden(1, 3, 1, ActivationKind::TLogSigmoid, -1.0, 1));
    EXPECT_THROW(make_feedforward({3, 1}, ActivationKind::TLogSigmoid, OutputHead::LogSoftmax, 1), std::invalid_argument);
    Layer bad = random_layer(rng, 2, 2);
    bad.w(0, 1) = 1.5;
    EXPECT_THROW(LayeredTransNN({bad}, ActivationKind::TLogSigmoid, OutputHead::Identity), DomainError);
}

TEST(Train, ProjectionKeepsLevelsInRange) {
    const Dataset data = make_two_clusters(64, 3);
    auto m = make_feedforward({2, 6, 2}, ActivationKind::TLogSigmoid, OutputHead::LogSoftmax, 3);
    TrainConfig cfg;
    cfg.loss = Loss::NLL;
    cfg.optimizer = OptimizerKind::SGD;
    cfg.learning_rate = 5.0;
    cfg.epochs = 20;
    const auto r = train(m, data, cfg);
    for (const auto& l : r.model.layers())
        for (double v : l.w.data()) EXPECT_TRUE(v >= 0.0 && v <= 1.0);
}

TEST(Train, DeterministicAcrossRunsAndThreads) {
    const Dataset data = make_two_clusters(90, 11);
    const auto m = make_feedforward({2, 8, 2}, ActivationKind::TSoftAffine, OutputHead::LogSoftmax, 11);
    TrainConfig cfg;
    cfg.loss = Loss::NLL;
    cfg.epochs = 15;
    cfg.batch_size = 16;
    cfg.seed = 5;
    const auto r1 = train(m, data, cfg);
    const auto r2 = train(m, data, cfg);
    cfg.threads = 3;
    const auto r3 = train(m, data, cfg);
    EXPECT_TRUE(same_parameters(r1.model, r2.model));
    EXPECT_TRUE(same_parameters(r1.model, r3.model));
    for (std::size_t e = 0; e < r1.history.size(); ++e) EXPECT_EQ(r1.history[e].train_loss, r3.history[e].train_loss);
}

TEST(Train, ZeroLearningRateLeavesModelUnchanged) {
    const Dataset data = make_two_clusters(40, 2);
    const auto m = make_feedforward({2, 4, 2}, ActivationKind::TLogSigmoid, OutputHead::LogSoftmax, 2);
    TrainConfig cfg;
    cfg.loss = Loss::NLL;
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    const auto r = train(m, data, cfg);
    EXPECT_TRUE(same_parameters(r.model, m));
    EXPECT_EQ(r.history.size(), 5u);
    EXPECT_EQ(r.history.front().train_loss, r.history.back().train_loss);
    cfg.learning_rate = -1.0;
    EXPECT_THROW(train(m, data, cfg), ValidationError);
}

TEST(Train, WeightDecayShrinksWeightsMonotonically) {
    std::mt19937_64 rng(9);
    auto m = random_model(rng, ActivationKind::TLogSigmoid, {2, 3, 1});
    // zero levels make the data term independent of a
    for (auto& l : m.layers()) l.w = Matrix(l.w.rows(), l.w.cols(), 0.0);
    Dataset data{Matrix(8, 2), Matrix(8, 1)};
    for (double& v : data.inputs.data()) v = fixtures::uniform(rng, -1.0, 1.0);
    TrainConfig cfg;
    cfg.optimizer = OptimizerKind::SGD;
    cfg.learning_rate = 0.05;
    cfg.l2 = 1.0;
    cfg.train_w = false;
    cfg.train_bias = false;
    cfg.epochs = 1;
    double prev = kInfinity;
    for (int round = 0; round < 100; ++round) {
        m = train(m, data, cfg).model;
        double norm = 0.0;
        for (const auto& l : m.layers())
            for (double v : l.a.data()) norm = std::max(norm, std::abs(v));
        EXPECT_LT(norm, prev);
        prev = norm;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(Train, SeparableClustersAreLearned) {
    const Dataset data = make_two_clusters(400, 21);
    // oracle: plain logistic regression by gradient descent
    double w0 = 0, w1 = 0, b = 0;
    for (int it = 0; it < 2000; ++it) {
        double g0 = 0, g1 = 0, gb = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double z = w0 * data.inputs(i, 0) + w1 * data.inputs(i, 1) + b;
            const double r = oracle::sigmoid(z) - data.targets(i, 0);
            g0 += r * data.inputs(i, 0);
            g1 += r * data.inputs(i, 1);
            gb += r;
        }
        w0 -= 0.1 * g0 / 400;
        w1 -= 0.1 * g1 / 400;
        b -= 0.1 * gb / 400;
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i)
        hits += (w0 * data.inputs(i, 0) + w1 * data.inputs(i, 1) + b > 0) == (data.targets(i, 0) == 1.0);
    ASSERT_GE(hits, 396u);

    ExperimentConfig cfg = default_classification_config();
    cfg.train.epochs = 200;
    for (auto kind : {ActivationKind::TLogSigmoid, ActivationKind::TSoftAffine}) {
        cfg.model.activation = kind;
        const auto r = train(build_model(cfg.model, 2, 2, 21), data, cfg.train);
        EXPECT_GE(accuracy(r.model, data), 0.99);
        EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
    }
}

TEST(Train, NonFiniteValuesAreReported) {
    Dataset data = make_two_clusters(10, 1);
    data.inputs(3, 0) = std::nan("");
    const auto m = make_feedforward({2, 3, 2}, ActivationKind::TLogSigmoid, OutputHead::LogSoftmax, 1);
    TrainConfig cfg;
    cfg.loss = Loss::NLL;
    cfg.epochs = 2;
    try {
        train(m, data, cfg);
        FAIL() << "expected a validation error";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "dataset row 3");
    }

    // overflowing weights: the loss itself becomes infinite
    auto huge = make_feedforward({2, 3, 1}, ActivationKind::TSoftAffine, OutputHead::Identity, 1);
    for (auto& l : huge.layers()) std::fill(l.a.data().begin(), l.a.data().end(), 1e200);
    Dataset reg{Matrix(4, 2, 1.0), Matrix(4, 1, 0.0)};
    cfg.loss = Loss::MSE;
    try {
        train(huge, reg, cfg);
        FAIL() << "expected a numerical error";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("epoch 1 batch 0"), std::string::npos) << e.what();
    }
}

TEST(Universal, ConstantTargetAtWidthOne) {
    UniversalConfig cfg;
    cfg.epochs = 1500;
    cfg.train_points = 64;
    cfg.eval_points = 501;
    const auto fit = fit_universal(constant_target(0.7), 1, cfg);
    EXPECT_LT(fit.sup_error, 1e-3);
}

TEST(Universal, WidthLadderImproves) {
    UniversalConfig cfg;
    cfg.epochs = 600;
    cfg.train_points = 128;
    cfg.eval_points = 1001;
    const auto narrow = fit_universal(gaussian_bump_target(), 2, cfg);
    const auto wide = fit_universal(gaussian_bump_target(), 16, cfg);
    EXPECT_LT(wide.sup_error, narrow.sup_error);
    EXPECT_LT(wide.sup_error, 0.05);
}

TEST(Universal, BiasValidation) {
    UniversalConfig cfg;
    cfg.b = 0.0;
    EXPECT_THROW(fit_universal(sin_target(), 4, cfg), ValidationError);
    cfg.b = -0.5;
    cfg.activation = ActivationKind::TLogSigmoidPlus;
    EXPECT_THROW(fit_universal(sin_target(), 4, cfg), ValidationError);
    EXPECT_THROW(target_by_name("cosh"), ValidationError);
}

TEST(Universal, RationalRoundingIsHarmless) {
    UniversalConfig cfg;
    cfg.epochs = 300;
    cfg.train_points = 64;
    cfg.eval_points = 501;
    cfg.rational = true;
    const auto fit = fit_universal(sin_target(), 8, cfg);
    ASSERT_TRUE(fit.rational);
    EXPECT_LE(fit.rational->sup_error_change, fit.rational->perturbation_bound + 1e-15);
    EXPECT_LT(fit.rational->max_abs_delta_a, 1e-6 * 8);
    EXPECT_EQ(fit.rational->weights.size(), 8u);
}

TEST(Universal, BestRational) {
    const Rational pi = best_rational(M_PI, 1000);
    EXPECT_EQ(pi.num, 355);
    EXPECT_EQ(pi.den, 113);
    EXPECT_EQ(best_rational(0.5, 10).den, 2);
    const Rational neg = best_rational(-0.75, 100);
    EXPECT_EQ(neg.num, -3);
    EXPECT_EQ(neg.den, 4);
    EXPECT_EQ(best_rational(2.6, 1).num, 3);
    // brute force over every denominator
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = fixtures::uniform(rng, -5.0, 5.0);
        const std::int64_t max_den = 1 + trial;
        double best = kInfinity;
        for (std::int64_t q = 1; q <= max_den; ++q) {
            const double p = std::round(x * double(q));
            best = std::min(best, std::abs(p / double(q) - x));
        }
        const Rational r = best_rational(x, max_den);
        EXPECT_LE(r.den, max_den);
        EXPECT_NEAR(std::abs(r.value() - x), best, 1e-15) << x << " " << max_den;
    }
    EXPECT_THROW(best_rational(kInfinity, 10), DomainError);
}

TEST(Persistence, CheckpointRoundTrip) {
    const auto m = make_single_hidden(2, 5, 2, ActivationKind::TSoftAffine, 0.5, 4);
    const auto path = std::filesystem::temp_directory_path() / "transnn_test_learn_ckpt.json";
    save_checkpoint(m, path);
    const auto back = load_checkpoint(path);
    EXPECT_TRUE(same_parameters(back, m));
    EXPECT_EQ(back.activation(), m.activation());
    EXPECT_EQ(back.fixed_bias(), m.fixed_bias());
    EXPECT_EQ(back.layers()[1].sharing, LevelSharing::PerSource);
    const Vector x{0.3, -0.4};
    EXPECT_EQ(predict(back, x), predict(m, x));
}

TEST(Persistence, DatasetCsvAndSplit) {
    const Dataset d = make_two_clusters(10, 3);
    std::stringstream io;
    write_dataset_csv(io, d, true);
    const Dataset back = read_dataset_csv(io);
    EXPECT_EQ(back.inputs, d.inputs);
    EXPECT_EQ(back.targets, d.targets);
    const auto [tr, va] = split(d, 0.2);
    EXPECT_EQ(tr.size(), 8u);
    EXPECT_EQ(va.size(), 2u);
    EXPECT_THROW(split(d, 1.0), ValidationError);
    std::istringstream bad("x0,y0\n1,2\n3\n");
    EXPECT_THROW(read_dataset_csv(bad), ValidationError);
}

TEST(Persistence, ExperimentConfigJson) {
    const auto cfg = experiment_config_from_json(nlohmann::json::parse(
        R"({"model":{"hidden":[8,4],"activation":"phi"},"train":{"epochs":12,"learning_rate":0},"seed":3})"));
    EXPECT_EQ(cfg.model.hidden, (std::vector<std::size_t>{8, 4}));
    EXPECT_EQ(cfg.model.activation, ActivationKind::TSoftAffine);
    EXPECT_EQ(cfg.train.epochs, 12u);
    EXPECT_EQ(cfg.train.learning_rate, 0.0);
    const auto again = experiment_config_from_json(to_json(cfg));
    EXPECT_EQ(to_json(again), to_json(cfg));
    auto field = [](const char* text) -> std::string {
        try {
            experiment_config_from_json(nlohmann::json::parse(text));
        } catch (const ValidationError& e) {
            return e.field();
        }
        return "<no error>";
    };
    EXPECT_EQ(field(R"({"train":{"loss":"hinge"}})"), "train.loss");
    EXPECT_EQ(field(R"({"model":{"level":2}})"), "model.level");
    EXPECT_EQ(field(R"({"model":{"widths":[3]}})"), "model.widths");
    EXPECT_EQ(field(R"({"n":1,"model":"single"})"), "n");
    EXPECT_EQ(field(R"({"train":[1]})"), "train");
    EXPECT_EQ(field(R"({"train":{"learning_rate":-1}})"), "learning_rate");
}

TEST(Comparison, AllVariantsReportCurves) {
    ExperimentConfig cfg = default_classification_config();
    cfg.train.epochs = 30;
    const auto res = compare_activations(make_two_clusters(60, 5), cfg, 5);
    ASSERT_EQ(res.names.size(), 5u);
    for (const auto& curve : res.losses) EXPECT_EQ(curve.size(), 30u);
    std::ostringstream out;
    write_comparison_csv(out, res);
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "epoch,TPsi,TPhi,fixed-Psi,fixed-Phi,relu-equivalent");
}
