#include "v2xalloc/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <fmt/ranges.h>

#include "v2xalloc/config.hpp"
#include "v2xalloc/error.hpp"
#include "v2xalloc/pipeline.hpp"

namespace v2x {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct GenDataArgs {
    std::string config;
    int samples = 0;
    std::string out;
    std::optional<std::uint64_t> seed;
    int workers = 1;
    int max_iter = 500;
    double tol = 1e-6;
};

struct TrainArgs {
    std::string data;
    std::string out;
    std::string report;
    std::string config;
    std::vector<int> hidden{50, 22, 20};
    int batch_size = 100;
    double lr = 1e-3;
    int epochs = 100;
    double val_split = 0.1;
    std::uint64_t seed = 0;
};

struct XvalArgs {
    std::string data;
    std::string out;
    std::string config;
    std::vector<int> hidden{50, 22, 20};
    std::vector<int> batch_sizes{100, 500, 1000};
    std::vector<double> lrs{1e-3};
    int epochs = 50;
    double val_split = 0.1;
    std::uint64_t seed = 0;
    std::optional<double> threshold;
};

struct EvalArgs {
    std::string data;
    std::string model;
    std::string out;
    std::string config;
    bool timing = false;
    int bins = 40;
};

struct SolveArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> grid;
    int max_iter = 500;
    double tol = 1e-6;
};

std::optional<SystemConfig> optional_config(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return load_config(path);
}

void echo_config(std::ostream& out, const SystemConfig& cfg) {
    out << "# resolved system configuration\n" << format_config(cfg);
}

void ensure_parent(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::string eta_label(double eta) { return fmt::format("{:g}", eta); }

int cmd_gen_data(const GenDataArgs& a, std::ostream& out) {
    SystemConfig cfg = load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    SolverOptions solver;
    solver.max_iter = a.max_iter;
    solver.tol = a.tol;
    solver.validate();
    if (a.samples < 1) throw ConfigError("--samples must be >= 1");

    echo_config(out, cfg);
    fmt::print(out, "samples = {}\nout = {}\nworkers = {}\nsolver_max_iter = {}\nsolver_tol = {}\n",
               a.samples, a.out, a.workers, solver.max_iter, solver.tol);
    fmt::print(out, "feature_width = {}\n",
               feature_dim(cfg.m_cellular, cfg.k_v2v, cfg.feature_layout));

    const auto start = Clock::now();
    const Dataset data = generate_dataset(cfg, a.samples, solver, cfg.seed, a.workers);
    ensure_parent(a.out);
    save_dataset(data, a.out);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    fmt::print(out, "wrote {} samples ({} not converged) to {} in {:.3f} s\n", data.size(),
               data.nonconverged(), a.out, secs);
    return 0;
}

int cmd_train(TrainArgs a, std::ostream& out) {
    const Dataset data = load_dataset(a.data, optional_config(a.config));
    if (a.report.empty()) a.report = a.out + ".report.csv";

    TrainOptions opts;
    opts.hidden = a.hidden;
    opts.batch_size = a.batch_size;
    opts.eta = a.lr;
    opts.epochs = a.epochs;
    opts.val_fraction = a.val_split;
    opts.seed = a.seed;
    const LayerSpec spec = make_layer_spec(data.cfg, opts.hidden);

    echo_config(out, data.cfg);
    fmt::print(out,
               "data = {}\nrows = {}\nfeature_layout = {}\ninput_width = {}\nlayers = {}\n"
               "batch_size = {}\nlr = {}\nepochs = {}\nval_split = {}\nseed = {}\nout = {}\n"
               "report = {}\n",
               a.data, data.size(), to_string(data.cfg.feature_layout), spec.n_in(),
               fmt::join(spec.sizes, ","), opts.batch_size, opts.eta, opts.epochs,
               opts.val_fraction, opts.seed, a.out, a.report);

    TrainResult result = train(data, opts);
    ensure_parent(a.out);
    ensure_parent(a.report);
    save_model(result.net, a.out);
    write_train_report(result.report, a.report);

    const auto& r = result.report;
    fmt::print(out, "epochs run = {}, optimizer steps = {}\n", r.epochs_run(), r.optimizer_steps);
    if (!r.train_mse.empty())
        fmt::print(out, "final train mse = {:.6g}, final val mse = {:.6g}\n", r.train_mse.back(),
                   r.val_mse.back());
    if (r.diverged) {
        fmt::print(out, "training diverged; partial model and report written\n");
        return 1;
    }
    return 0;
}

int cmd_xval(const XvalArgs& a, std::ostream& out) {
    const Dataset data = load_dataset(a.data, optional_config(a.config));
    TrainOptions base;
    base.hidden = a.hidden;
    base.epochs = a.epochs;
    base.val_fraction = a.val_split;
    base.seed = a.seed;

    echo_config(out, data.cfg);
    fmt::print(out,
               "data = {}\nrows = {}\ninput_width = {}\nhidden = {}\nbatch_sizes = {}\nlrs = {}\n"
               "epochs = {}\nval_split = {}\nseed = {}\nout = {}\n",
               a.data, data.size(), data.feature_width(), fmt::join(a.hidden, ","),
               fmt::join(a.batch_sizes, ","), fmt::join(a.lrs, ","), a.epochs, a.val_split, a.seed,
               a.out);

    const auto grid = cross_validate(data, base, a.batch_sizes, a.lrs);

    double threshold = 0.0;
    if (a.threshold) {
        threshold = *a.threshold;
    } else {
        // loosest final validation MSE among healthy cells: every one of them reaches it
        for (const auto& cell : grid)
            if (!cell.failed() && !cell.report->val_mse.empty())
                threshold = std::max(threshold, cell.report->val_mse.back());
    }
    fmt::print(out, "threshold = {}\n", threshold);

    fs::create_directories(a.out);
    for (const auto& cell : grid) {
        const std::string name = fmt::format("cell_b{}_lr{}", cell.batch_size, eta_label(cell.eta));
        if (cell.report) write_train_report(*cell.report, fs::path(a.out) / (name + ".csv"));
        fmt::print(out, "{}: {}\n", name,
                   cell.report ? (cell.report->diverged ? "diverged" : "ok")
                               : "failed: " + cell.error);
    }
    write_xval_summary(grid, threshold, fs::path(a.out) / "summary.csv");
    return 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const Network net = load_model(a.model);
    std::optional<SystemConfig> base = optional_config(a.config);
    Dataset data = load_dataset(a.data, base);
    if (!base) {
        // budgets come from the model's clamp ceilings when no config is given
        const int m = data.cfg.m_cellular;
        if (net.spec().n_out() == data.cfg.users()) {
            if (m > 0) data.cfg.pmax_c = net.pmax_out()(0);
            if (data.cfg.k_v2v > 0) data.cfg.pmax_v = net.pmax_out()(m);
        }
    }
    EvalOptions opts;
    opts.timing = a.timing;
    opts.pdf_bins = a.bins;

    echo_config(out, data.cfg);
    fmt::print(out, "data = {}\nrows = {}\nmodel = {}\nmodel_layers = {}\nout = {}\ntiming = {}\n"
                    "pdf_bins = {}\n",
               a.data, data.size(), a.model, fmt::join(net.spec().sizes, ","), a.out, a.timing,
               a.bins);

    const EvalReport rep = evaluate(net, data, opts);
    write_eval_report(rep, a.out);
    fmt::print(out, "mean dnn rate = {:.6g}, mean wmmse rate = {:.6g}, ratio = {:.6g}\n",
               rep.mean_dnn_rate, rep.mean_wmmse_rate, rep.mean_ratio);
    fmt::print(out, "test mse = {:.6g}, ks distance = {:.6g}\n", rep.test_mse, rep.ks);
    if (a.timing)
        fmt::print(out, "mean inference = {:.3f} us, mean solve = {:.3f} us\n", rep.mean_infer_us,
                   rep.mean_solve_us);
    return 0;
}

void print_vector(std::ostream& out, const char* label, const Eigen::VectorXd& v) {
    fmt::print(out, "{} =", label);
    for (Eigen::Index i = 0; i < v.size(); ++i) fmt::print(out, " {:.6g}", v(i));
    fmt::print(out, "\n");
}

int cmd_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
    SystemConfig cfg = load_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    SolverOptions solver;
    solver.max_iter = a.max_iter;
    solver.tol = a.tol;
    solver.validate();

    echo_config(out, cfg);
    fmt::print(out, "solver_max_iter = {}\nsolver_tol = {}\n", solver.max_iter, solver.tol);
    if (a.grid) fmt::print(out, "grid = {}\n", *a.grid);

    const ChannelRealization real = sample_realization(cfg, cfg.seed, 0);
    fmt::print(out, "\n# instance (sample 0 of seed {})\n", cfg.seed);
    print_vector(out, "hc", real.hc);
    print_vector(out, "hvb", real.hvb);
    print_vector(out, "gd", real.gd);
    for (int l = 0; l < real.k(); ++l)
        print_vector(out, fmt::format("gcross[{}]", l).c_str(), real.gcross.row(l).transpose());
    for (int m = 0; m < real.m(); ++m)
        print_vector(out, fmt::format("hcv[{}]", m).c_str(), real.hcv.row(m).transpose());

    const WmmseSolution sol = solve(real, cfg, solver);
    fmt::print(out, "\n# wmmse\n");
    print_vector(out, "pc", sol.power.pc);
    print_vector(out, "pv", sol.power.pv);
    fmt::print(out, "sum_rate = {:.10g}\niterations = {}\nconverged = {}\nobjective = {:.10g}\n",
               sol.sum_rate, sol.iterations, sol.converged, sol.objective_trace.back());

    if (a.grid) {
        try {
            const OracleResult best = brute_force_oracle(real, cfg, *a.grid);
            fmt::print(out, "\n# grid oracle ({} points per user)\n", *a.grid);
            print_vector(out, "pc", best.power.pc);
            print_vector(out, "pv", best.power.pv);
            fmt::print(out, "sum_rate = {:.10g}\nwmmse/grid = {:.6f}\n", best.sum_rate,
                       best.sum_rate > 0 ? sol.sum_rate / best.sum_rate : 1.0);
        } catch (const std::invalid_argument& e) {
            fmt::print(err, "error: {}\n", e.what());
            return 2;
        }
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"V2X power allocation: WMMSE labelling and neural approximation", "v2xalloc"};
    app.require_subcommand(1);

    GenDataArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-data", "Generate a WMMSE-labelled dataset");
    gen_cmd->add_option("--config", gen.config, "System config file")->required();
    gen_cmd->add_option("--samples", gen.samples, "Number of samples")->required();
    gen_cmd->add_option("--out", gen.out, "Output dataset CSV")->required();
    gen_cmd->add_option("--seed", gen.seed, "RNG seed (overrides config)");
    gen_cmd->add_option("--workers", gen.workers, "Worker threads")->capture_default_str();
    gen_cmd->add_option("--max-iter", gen.max_iter, "WMMSE sweep limit")->capture_default_str();
    gen_cmd->add_option("--tol", gen.tol, "WMMSE objective tolerance")->capture_default_str();

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train the power-allocation network");
    train_cmd->add_option("--data", tr.data, "Training dataset CSV")->required();
    train_cmd->add_option("--out", tr.out, "Output model file")->required();
    train_cmd->add_option("--report", tr.report, "Per-epoch CSV (default <out>.report.csv)");
    train_cmd->add_option("--config", tr.config, "Config supplying budgets/noise/weights");
    train_cmd->add_option("--hidden", tr.hidden, "Hidden widths")->delimiter(',')->capture_default_str();
    train_cmd->add_option("--batch-size", tr.batch_size)->capture_default_str();
    train_cmd->add_option("--lr", tr.lr, "RMSprop learning rate")->capture_default_str();
    train_cmd->add_option("--epochs", tr.epochs)->capture_default_str();
    train_cmd->add_option("--val-split", tr.val_split)->capture_default_str();
    train_cmd->add_option("--seed", tr.seed)->capture_default_str();

    XvalArgs xv;
    auto* xval_cmd = app.add_subcommand("xval", "Batch size / learning rate grid");
    xval_cmd->add_option("--data", xv.data)->required();
    xval_cmd->add_option("--out", xv.out, "Output directory")->required();
    xval_cmd->add_option("--config", xv.config);
    xval_cmd->add_option("--hidden", xv.hidden)->delimiter(',')->capture_default_str();
    xval_cmd->add_option("--batch-sizes", xv.batch_sizes)->delimiter(',')->capture_default_str();
    xval_cmd->add_option("--lrs", xv.lrs)->delimiter(',')->capture_default_str();
    xval_cmd->add_option("--epochs", xv.epochs)->capture_default_str();
    xval_cmd->add_option("--val-split", xv.val_split)->capture_default_str();
    xval_cmd->add_option("--seed", xv.seed)->capture_default_str();
    xval_cmd->add_option("--threshold", xv.threshold,
                         "Validation MSE threshold (default: loosest final MSE of healthy cells)");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a test dataset");
    eval_cmd->add_option("--data", ev.data)->required();
    eval_cmd->add_option("--model", ev.model)->required();
    eval_cmd->add_option("--out", ev.out, "Output directory")->required();
    eval_cmd->add_option("--config", ev.config, "Config the test set was generated with");
    eval_cmd->add_flag("--timing", ev.timing, "Measure DNN and WMMSE times per sample");
    eval_cmd->add_option("--bins", ev.bins, "PDF histogram bins")->capture_default_str();

    SolveArgs so;
    auto* solve_cmd = app.add_subcommand("solve", "Solve one sampled instance");
    solve_cmd->add_option("--config", so.config)->required();
    solve_cmd->add_option("--seed", so.seed);
    solve_cmd->add_option("--grid", so.grid, "Also run the brute-force oracle (M+K <= 3)");
    solve_cmd->add_option("--max-iter", so.max_iter)->capture_default_str();
    solve_cmd->add_option("--tol", so.tol)->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*gen_cmd) return cmd_gen_data(gen, out);
        if (*train_cmd) return cmd_train(tr, out);
        if (*xval_cmd) return cmd_xval(xv, out);
        if (*eval_cmd) return cmd_eval(ev, out);
        if (*solve_cmd) return cmd_solve(so, out, err);
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return 1;
    }
    return 1;
}

}  // namespace v2x
