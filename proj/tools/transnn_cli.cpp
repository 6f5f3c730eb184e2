// transnn command-line driver.
//
//   transnn [--seed N] [--out-dir DIR] [--format csv|json] [--quiet] <command> ...
//
// Commands: simulate, threshold, ode, consistency, train, approx, validate.
// Exit codes: 0 success, 2 invalid input, 3 numerical-domain failure,
// 4 non-convergence.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_support.hpp"
#include "transnn/transnn.hpp"

namespace {

using namespace transnn;
using namespace transnn::cli;

struct Global {
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    std::string format = "csv";
    bool quiet = false;
    std::vector<std::string> argv;

    bool json() const { return format == "json"; }
    fs::path dir() const { return fs::path(out_dir); }
    std::string ext() const { return json() ? ".json" : ".csv"; }
};

void say(const Global& g, const std::string& line) {
    if (!g.quiet) std::cout << line << '\n';
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

Manifest manifest_for(const Global& g, const std::string& command) {
    Manifest m;
    m.argv = g.argv;
    m.command = command;
    m.seed = g.seed;
    m.config["format"] = g.format;
    return m;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string network, p0 = "all=0", representation = "prob";
    std::size_t horizon = 10;
};

int run_simulate(const Global& g, const SimulateArgs& a) {
    const TransmissionNetwork net = load_network(a.network);
    const ProbabilityState p0 = parse_p0(a.p0, net.size());
    const Representation repr = [&] {
        try {
            return parse_representation(a.representation);
        } catch (const std::invalid_argument& e) {
            throw ValidationError("--repr", e.what());
        }
    }();

    Manifest m = manifest_for(g, "simulate");
    m.config.update({{"network", a.network}, {"p0", a.p0}, {"horizon", a.horizon},
                     {"representation", std::string(to_string(repr))}});
    m.inputs = {a.network};
    const fs::path data = g.dir() / ("trajectory" + g.ext());
    const fs::path plot = g.dir() / "trajectory.gp";
    m.outputs = {data};
    if (!g.json()) m.outputs.push_back(plot);
    write_manifest(g.dir(), m);

    const Trajectory traj = simulate(net, p0, a.horizon, repr);
    auto out = open_output(data);
    if (g.json()) {
        out << trajectory_to_json(traj).dump(2) << '\n';
    } else {
        write_trajectory_csv(out, traj);
        write_gnuplot(plot, data, {"Infection probabilities", "step", "p"}, 1, {{3, "node"}}, 2, traj.nodes());
    }
    const Vector last = traj.probabilities(traj.horizon());
    say(g, "simulated " + std::to_string(a.horizon) + " steps on " + std::to_string(net.size()) +
               " nodes; final max p = " + fmt("%.6g", *std::max_element(last.begin(), last.end())));
    return kOk;
}

// ---------------------------------------------------------------------------

int run_threshold(const Global& g, const std::string& network) {
    const TransmissionNetwork net = load_network(network);
    Manifest m = manifest_for(g, "threshold");
    m.config["network"] = network;
    m.inputs = {network};
    const fs::path report_path = g.dir() / "threshold.json";
    m.outputs = {report_path};
    write_manifest(g.dir(), m);

    const ThresholdReport rep = extinction_check(net);
    open_output(report_path) << to_json(rep).dump(2) << '\n';
    say(g, fmt("radius %.6f, ", rep.spectral_radius) + std::string(to_string(rep.verdict)));
    if (!rep.converged) {
        std::cerr << "error: spectral radius did not converge after " << rep.iterations << " iterations\n";
        return kNonConvergence;
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct OdeArgs {
    std::string rates, p0 = "all=0";
    double t_end = 1.0, dt = 0.01;
};

VectorField field_for(const RateSystem& sys) {
    if (sys.rates.multi()) return [sys](std::span<const double> p) { return sis_rhs_multi(sys.rates, p); };
    return [sys](std::span<const double> p) { return sis_rhs_single(sys.rates, sys.adjacency, p); };
}

int run_ode(const Global& g, const OdeArgs& a) {
    const RateSystem sys = load_rates(a.rates);
    const ProbabilityState p0 = parse_p0(a.p0, sys.rates.size());
    if (!(a.dt > 0.0) || !std::isfinite(a.dt)) throw ValidationError("--dt", "must be positive");
    if (!(a.t_end >= 0.0) || !std::isfinite(a.t_end)) throw ValidationError("--t-end", "must be nonnegative");

    Manifest m = manifest_for(g, "ode");
    m.config.update({{"rates", a.rates}, {"p0", a.p0}, {"t_end", a.t_end}, {"dt", a.dt}});
    m.inputs = {a.rates};
    const fs::path data = g.dir() / ("ode" + g.ext());
    const fs::path plot = g.dir() / "ode.gp";
    m.outputs = {data};
    if (!g.json()) m.outputs.push_back(plot);
    write_manifest(g.dir(), m);

    const TimeSeries ts = integrate(field_for(sys), p0, a.t_end, a.dt);
    Table table{{"t", "node", "p"}, {}};
    for (std::size_t k = 0; k < ts.t.size(); ++k)
        for (std::size_t i = 0; i < ts.p[k].size(); ++i) table.rows.push_back({ts.t[k], double(i), ts.p[k][i]});
    table.write(data, g.json());
    if (!g.json()) write_gnuplot(plot, data, {"Network SIS", "t", "p"}, 1, {{3, "node"}}, 2, sys.rates.size());
    if (!ts.clamps.empty() && !g.quiet) {
        std::cerr << "warning: " << ts.clamps.size() << " clamp events, largest correction "
                  << ts.max_clamp() << '\n';
    }
    std::string line = "t_end " + fmt("%.6g", ts.t.back()) + ": p =";
    for (double v : ts.p.back()) line += fmt(" %.9g", v);
    say(g, line);
    return kOk;
}

// ---------------------------------------------------------------------------

struct ConsistencyArgs {
    std::string rates, p0 = "all=0.5", deltas = "0.1,0.05,0.025,0.0125", self = "exp";
    double horizon = 5.0;
    std::size_t substeps = 16;
};

int run_consistency(const Global& g, const ConsistencyArgs& a) {
    const RateSystem sys = load_rates(a.rates);
    const ProbabilityState p0 = parse_p0(a.p0, sys.rates.size());
    const std::vector<double> deltas = parse_list(a.deltas, "--deltas");
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        if (!(deltas[k] > 0.0)) throw ValidationError("--deltas", "entries must be positive");
        if (k && !(deltas[k] < deltas[k - 1])) throw ValidationError("--deltas", "entries must be strictly decreasing");
    }
    if (!(a.horizon > 0.0)) throw ValidationError("--horizon", "must be positive");
    if (a.substeps == 0) throw ValidationError("--substeps", "must be positive");
    ConsistencyOptions opt;
    opt.horizon = a.horizon;
    opt.reference_substeps = a.substeps;
    if (a.self == "exp") opt.self = SelfTransmission::Exponential;
    else if (a.self == "linear") opt.self = SelfTransmission::Linear;
    else throw ValidationError("--self", "must be 'exp' or 'linear'");
    for (double d : deltas) detail::discretize(sys.rates, sys.adjacency, d, opt.self);

    Manifest m = manifest_for(g, "consistency");
    m.config.update({{"rates", a.rates}, {"p0", a.p0}, {"deltas", deltas}, {"horizon", a.horizon},
                     {"self", a.self}, {"reference_substeps", a.substeps}});
    m.inputs = {a.rates};
    const fs::path data = g.dir() / ("consistency" + g.ext());
    const fs::path plot = g.dir() / "consistency.gp";
    m.outputs = {data};
    if (!g.json()) m.outputs.push_back(plot);
    write_manifest(g.dir(), m);

    const auto table = discretization_consistency(sys.rates, sys.adjacency, p0, deltas, opt);
    Table t{{"delta", "sup_error", "order_estimate"}, {}};
    for (const auto& r : table) t.rows.push_back({r.delta, r.sup_error, r.order_estimate});
    t.write(data, g.json());
    if (!g.json()) write_gnuplot(plot, data, {"Discretization error", "delta", "sup error", true, true}, 1, {{2, "sup_error"}});
    for (const auto& r : table) {
        say(g, "delta " + fmt("%-10g", r.delta) + " sup_error " + fmt("%.6e", r.sup_error) +
                   (std::isnan(r.order_estimate) ? "" : " order " + fmt("%.3f", r.order_estimate)));
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data = "synthetic", config;
    std::size_t samples = 200;
    bool compare = false;
};

int run_train(const Global& g, const TrainArgs& a) {
    learn::ExperimentConfig cfg = learn::default_classification_config();
    std::vector<fs::path> inputs;
    if (!a.config.empty()) {
        std::ifstream in(a.config);
        if (!in) throw ValidationError(a.config, "cannot open file");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(a.config + " byte " + std::to_string(e.byte), "malformed JSON");
        }
        cfg = learn::experiment_config_from_json(doc);
        inputs.push_back(a.config);
    }
    const std::uint64_t seed = cfg.seed.value_or(g.seed);
    cfg.train.seed = seed;
    cfg.train.validate();
    learn::Dataset data;
    if (a.data == "synthetic") {
        data = learn::make_two_clusters(a.samples, seed);
    } else {
        data = learn::load_dataset(a.data);
        inputs.push_back(a.data);
    }
    const auto [train_set, val_set] = learn::split(data, cfg.validation_fraction);
    std::size_t outputs = data.targets.cols();
    if (cfg.train.loss == learn::Loss::NLL) {
        double mx = 0;
        for (std::size_t i = 0; i < data.size(); ++i) mx = std::max(mx, data.targets(i, 0));
        outputs = static_cast<std::size_t>(mx) + 1;
        if (outputs < 2) outputs = 2;
    }
    const learn::LayeredTransNN model = [&] {
        try {
            return learn::build_model(cfg.model, data.inputs.cols(), outputs, seed);
        } catch (const std::invalid_argument& e) {
            throw ValidationError("model", e.what());
        }
    }();
    learn::check_dataset(model, train_set, cfg.train.loss);

    Manifest m = manifest_for(g, "train");
    m.config = learn::to_json(cfg);
    m.config["data"] = a.data;
    m.config["samples"] = a.samples;
    m.config["compare"] = a.compare;
    m.seed = seed;
    m.inputs = inputs;
    const fs::path initial = g.dir() / "checkpoint_initial.json";
    const fs::path final_ckpt = g.dir() / "checkpoint_final.json";
    const fs::path log = g.dir() / "training_log.csv";
    const fs::path log_plot = g.dir() / "training_log.gp";
    const fs::path cmp = g.dir() / "activation_comparison.csv";
    const fs::path cmp_plot = g.dir() / "activation_comparison.gp";
    m.outputs = {initial, final_ckpt, log, log_plot};
    if (a.compare) m.outputs.insert(m.outputs.end(), {cmp, cmp_plot});
    write_manifest(g.dir(), m);

    learn::save_checkpoint(model, initial);
    const learn::TrainResult result =
        learn::train(model, train_set, cfg.train, val_set.empty() ? nullptr : &val_set);
    learn::save_checkpoint(result.model, final_ckpt);
    {
        auto out = open_output(log);
        learn::write_training_log(out, result.history);
    }
    write_gnuplot(log_plot, log, {"Training loss", "epoch", "loss", false, true}, 1,
                  val_set.empty() ? std::vector<std::pair<int, std::string>>{{2, "train"}}
                                  : std::vector<std::pair<int, std::string>>{{2, "train"}, {3, "validation"}});
    std::string summary = "trained " + std::to_string(result.history.size()) + " epochs; final loss " +
                          fmt("%.6g", result.history.back().train_loss);
    if (cfg.train.loss == learn::Loss::NLL) summary += "; training accuracy " + fmt("%.4f", learn::accuracy(result.model, train_set));
    say(g, summary);

    if (a.compare) {
        const learn::ComparisonResult res = learn::compare_activations(train_set, cfg, seed);
        auto out = open_output(cmp);
        learn::write_comparison_csv(out, res);
        std::vector<std::pair<int, std::string>> cols;
        for (std::size_t k = 0; k < res.names.size(); ++k) cols.emplace_back(int(k) + 2, res.names[k]);
        write_gnuplot(cmp_plot, cmp, {"Activation comparison", "epoch", "training loss", false, true}, 1, cols);
        for (std::size_t k = 0; k < res.names.size(); ++k) {
            say(g, "  " + res.names[k] + ": final loss " + fmt("%.6g", res.losses[k].back()) +
                       (cfg.train.loss == learn::Loss::NLL ? ", accuracy " + fmt("%.4f", res.accuracy[k]) : ""));
        }
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct ApproxArgs {
    std::string target = "sin", widths = "8,16,32,64", activation = "psi";
    double b = 1.0;
    std::size_t epochs = 3000, train_points = 0, eval_points = 0;
    bool rational = false;
};

int run_approx(const Global& g, const ApproxArgs& a) {
    std::vector<learn::Target> targets;
    if (a.target == "all") {
        for (const auto& name : {"sin", "gaussian-bump", "sawtooth-smooth", "2d-peaks"}) targets.push_back(learn::target_by_name(name));
    } else {
        targets.push_back(learn::target_by_name(a.target));
    }
    std::vector<std::size_t> widths;
    for (double w : parse_list(a.widths, "--widths")) {
        if (!(w >= 1.0) || w != std::floor(w)) throw ValidationError("--widths", "widths must be positive integers");
        widths.push_back(static_cast<std::size_t>(w));
    }
    learn::UniversalConfig base;
    try {
        base.activation = parse_activation_kind(a.activation);
    } catch (const std::invalid_argument& e) {
        throw ValidationError("--activation", e.what());
    }
    base.b = a.b;
    base.epochs = a.epochs;
    base.seed = g.seed;
    base.rational = a.rational;
    base.validate();

    Manifest m = manifest_for(g, "approx");
    m.config.update({{"target", a.target}, {"widths", widths}, {"activation", a.activation}, {"b", a.b},
                     {"epochs", a.epochs}, {"rational", a.rational}, {"train_points", a.train_points},
                     {"eval_points", a.eval_points}});
    struct Planned {
        learn::Target target;
        learn::UniversalConfig cfg;
        fs::path data, plot;
        std::vector<fs::path> checkpoints;
    };
    std::vector<Planned> plan;
    for (const auto& t : targets) {
        Planned p{t, base, g.dir() / ("ladder_" + t.name + g.ext()), g.dir() / ("ladder_" + t.name + ".gp"), {}};
        if (t.inputs > 1) {
            p.cfg.train_points = 24;
            p.cfg.eval_points = 61;
        }
        if (a.train_points) p.cfg.train_points = a.train_points;
        if (a.eval_points) p.cfg.eval_points = a.eval_points;
        p.cfg.validate();
        m.outputs.push_back(p.data);
        if (!g.json()) m.outputs.push_back(p.plot);
        for (std::size_t w : widths) {
            p.checkpoints.push_back(g.dir() / ("model_" + t.name + "_w" + std::to_string(w) + ".json"));
            m.outputs.push_back(p.checkpoints.back());
        }
        plan.push_back(std::move(p));
    }
    write_manifest(g.dir(), m);

    for (const auto& p : plan) {
        Table table{{"width", "sup_error", "train_mse", "rational_sup_error", "sup_error_change", "perturbation_bound"}, {}};
        double prev = kInfinity;
        bool monotone = true;
        for (std::size_t k = 0; k < widths.size(); ++k) {
            const learn::UniversalFit fit = learn::fit_universal(p.target, widths[k], p.cfg);
            learn::save_checkpoint(fit.model, p.checkpoints[k]);
            const double nan = std::numeric_limits<double>::quiet_NaN();
            table.rows.push_back({double(widths[k]), fit.sup_error, fit.train_mse,
                                  fit.rational ? fit.rational->sup_error : nan,
                                  fit.rational ? fit.rational->sup_error_change : nan,
                                  fit.rational ? fit.rational->perturbation_bound : nan});
            monotone = monotone && fit.sup_error < prev;
            prev = fit.sup_error;
            say(g, p.target.name + " width " + std::to_string(widths[k]) + ": sup error " + fmt("%.6e", fit.sup_error) +
                       (fit.rational ? " (rational change " + fmt("%.3e", fit.rational->sup_error_change) + ")" : ""));
        }
        table.write(p.data, g.json());
        if (!g.json()) write_gnuplot(p.plot, p.data, {"Sup error vs width: " + p.target.name, "width", "sup error", true, true}, 1, {{2, "sup_error"}});
        if (!monotone && !g.quiet) std::cerr << "warning: " << p.target.name << " sup error is not strictly decreasing\n";
    }
    return kOk;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
    std::vector<std::string> networks, rates, datasets, configs, checkpoints;
};

int run_validate(const Global& g, const ValidateArgs& a) {
    if (a.networks.empty() && a.rates.empty() && a.datasets.empty() && a.configs.empty() && a.checkpoints.empty()) {
        throw ValidationError("validate", "nothing to validate; pass --network, --rates, --data, --config or --checkpoint");
    }
    for (const auto& f : a.networks) {
        const auto net = load_network(f);
        say(g, "ok network " + f + ": " + std::string(to_string(net.kind())) + ", n = " + std::to_string(net.size()));
    }
    for (const auto& f : a.rates) {
        const auto sys = load_rates(f);
        say(g, "ok rates " + f + ": " + (sys.rates.multi() ? "multi" : "single") + ", n = " + std::to_string(sys.rates.size()));
    }
    for (const auto& f : a.datasets) {
        const auto d = learn::load_dataset(f);
        say(g, "ok dataset " + f + ": " + std::to_string(d.size()) + " samples, " + std::to_string(d.inputs.cols()) + " inputs");
    }
    for (const auto& f : a.configs) {
        std::ifstream in(f);
        if (!in) throw ValidationError(f, "cannot open file");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(f + " byte " + std::to_string(e.byte), "malformed JSON");
        }
        learn::experiment_config_from_json(doc);
        say(g, "ok config " + f);
    }
    for (const auto& f : a.checkpoints) {
        const auto model = learn::load_checkpoint(f);
        say(g, "ok checkpoint " + f + ": " + std::to_string(model.parameter_count()) + " parameters");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    Global g;
    g.argv.assign(argv, argv + argc);
    CLI::App app{"Transmission neural networks: simulation, analysis and training"};
    app.set_version_flag("--version", std::string(TRANSNN_VERSION));
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
    app.add_option("--format", g.format, "Tabular output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    int code = kOk;

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "Iterate the discrete spread dynamics");
    c_sim->add_option("--network", sim.network, "Network file (.json or .csv)")->required();
    c_sim->add_option("--p0", sim.p0, "Initial condition: all=v, node:i=v or uniform-random(seed), comma separated")->capture_default_str();
    c_sim->add_option("--horizon", sim.horizon, "Number of steps")->capture_default_str();
    c_sim->add_option("--repr", sim.representation, "prob or info")->capture_default_str();
    c_sim->callback([&] { code = run_simulate(g, sim); });

    std::string thr_net;
    auto* c_thr = app.add_subcommand("threshold", "Spectral extinction check");
    c_thr->add_option("--network", thr_net, "Network file")->required();
    c_thr->callback([&] { code = run_threshold(g, thr_net); });

    OdeArgs ode;
    auto* c_ode = app.add_subcommand("ode", "Integrate the network SIS equations with RK4");
    c_ode->add_option("--rates", ode.rates, "Rates file (.json)")->required();
    c_ode->add_option("--p0", ode.p0, "Initial condition: all=v, node:i=v or uniform-random(seed), comma separated")->capture_default_str();
    c_ode->add_option("--t-end", ode.t_end, "Final time")->capture_default_str();
    c_ode->add_option("--dt", ode.dt, "Step size")->capture_default_str();
    c_ode->callback([&] { code = run_ode(g, ode); });

    ConsistencyArgs con;
    auto* c_con = app.add_subcommand("consistency", "Discrete-to-continuous convergence table");
    c_con->add_option("--rates", con.rates, "Rates file (.json)")->required();
    c_con->add_option("--p0", con.p0, "Initial condition: all=v, node:i=v or uniform-random(seed), comma separated")->capture_default_str();
    c_con->add_option("--deltas", con.deltas, "Decreasing comma-separated step sizes")->capture_default_str();
    c_con->add_option("--horizon", con.horizon, "Time horizon")->capture_default_str();
    c_con->add_option("--self", con.self, "Self-transmission form: exp or linear")->capture_default_str();
    c_con->add_option("--substeps", con.substeps, "RK4 reference steps per delta")->capture_default_str();
    c_con->callback([&] { code = run_consistency(g, con); });

    TrainArgs tr;
    auto* c_tr = app.add_subcommand("train", "Train a layered network");
    c_tr->add_option("--data", tr.data, "Dataset CSV, or 'synthetic' for the two-cluster task")->capture_default_str();
    c_tr->add_option("--config", tr.config, "Training config (.json)");
    c_tr->add_option("--samples", tr.samples, "Sample count for the synthetic task")->capture_default_str();
    c_tr->add_flag("--compare", tr.compare, "Also run the activation-comparison experiment");
    c_tr->callback([&] { code = run_train(g, tr); });

    ApproxArgs ap;
    auto* c_ap = app.add_subcommand("approx", "Single-hidden-layer approximation ladder");
    c_ap->add_option("--target", ap.target, "sin, gaussian-bump, sawtooth-smooth, 2d-peaks, sincos or all")->capture_default_str();
    c_ap->add_option("--widths", ap.widths, "Comma-separated hidden widths")->capture_default_str();
    c_ap->add_option("--activation", ap.activation, "psi, psi_plus or phi")->capture_default_str();
    c_ap->add_option("--b", ap.b, "Fixed bias (nonzero)")->capture_default_str();
    c_ap->add_option("--epochs", ap.epochs, "Adam epochs per width")->capture_default_str();
    c_ap->add_option("--train-points", ap.train_points, "Training grid points per axis");
    c_ap->add_option("--eval-points", ap.eval_points, "Evaluation grid points per axis");
    c_ap->add_flag("--rational", ap.rational, "Round output weights to rationals and re-report");
    c_ap->callback([&] { code = run_approx(g, ap); });

    ValidateArgs va;
    auto* c_va = app.add_subcommand("validate", "Check input files without running anything");
    c_va->add_option("--network", va.networks, "Network file");
    c_va->add_option("--rates", va.rates, "Rates file");
    c_va->add_option("--data", va.datasets, "Dataset CSV");
    c_va->add_option("--config", va.configs, "Training config");
    c_va->add_option("--checkpoint", va.checkpoints, "Model checkpoint");
    c_va->callback([&] { code = run_validate(g, va); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const DeltaTooLarge& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const NonConvergence& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return code;
}
