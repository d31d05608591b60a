#include "v2xalloc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "v2xalloc/error.hpp"
#include "v2xalloc/rate_model.hpp"
#include "v2xalloc/rng.hpp"

namespace v2x {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double micros_since(Clock::time_point start) {
    return std::chrono::duration<double, std::micro>(Clock::now() - start).count();
}

// Samples are columns.
double split_mse(const Network& net, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    if (x.cols() == 0) return std::numeric_limits<double>::quiet_NaN();
    const BatchTrace trace = forward_batch(net, x);
    return (trace.output() - y).squaredNorm() / static_cast<double>(y.rows() * y.cols());
}

bool weights_finite(const Network& net) {
    for (const auto& w : net.weights())
        if (!w.allFinite()) return false;
    return true;
}

}  // namespace

int Dataset::nonconverged() const {
    return static_cast<int>(std::count(converged.begin(), converged.end(), std::uint8_t{0}));
}

ChannelRealization Dataset::realization(int i) const {
    const Eigen::VectorXd row = features.row(i).transpose();
    if (cfg.feature_layout == FeatureLayout::Full)
        return unflatten_features(row, cfg.m_cellular, cfg.k_v2v, FeatureLayout::Full);
    ChannelRealization real = sample_realization(cfg, seed, static_cast<std::uint64_t>(i));
    if (flatten_features(real, cfg.feature_layout) != row)
        throw ConfigError(fmt::format(
            "row {}: stored PAPER_COMPAT features do not match channels regenerated from seed {}; "
            "supply the config the dataset was generated with",
            i, seed));
    return real;
}

Dataset Dataset::slice(int first, int count) const {
    Dataset out;
    out.cfg = cfg;
    out.solver = solver;
    out.seed = seed;
    out.generated_at = generated_at;
    out.features = features.middleRows(first, count);
    out.targets = targets.middleRows(first, count);
    out.label_rate = label_rate.segment(first, count);
    out.converged.assign(converged.begin() + first, converged.begin() + first + count);
    return out;
}

Dataset generate_dataset(const SystemConfig& cfg, int n_samples, const SolverOptions& solver,
                         std::uint64_t seed, int workers) {
    cfg.validate();
    solver.validate();
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    workers = std::clamp(workers, 1, n_samples);

    Dataset data;
    data.cfg = cfg;
    data.cfg.seed = seed;
    data.solver = solver;
    data.seed = seed;
    data.generated_at = std::chrono::system_clock::now();
    const int n_users = cfg.users();
    data.features.resize(n_samples, feature_dim(cfg.m_cellular, cfg.k_v2v, cfg.feature_layout));
    data.targets.resize(n_samples, n_users);
    data.label_rate.resize(n_samples);
    data.converged.assign(static_cast<std::size_t>(n_samples), 0);

    auto label = [&](int i) {
        const auto index = static_cast<std::uint64_t>(i);
        const ChannelRealization real = sample_realization(cfg, seed, index);
        SolverOptions opts = solver;
        opts.init_seed = Rng::substream(seed, Stream::SolverInit, index).next_u64();
        const WmmseSolution sol = solve(real, cfg, opts);
        data.features.row(i) = flatten_features(real, cfg.feature_layout).transpose();
        data.targets.row(i) = sol.power.joined().transpose();
        data.label_rate(i) = sol.sum_rate;
        data.converged[static_cast<std::size_t>(i)] = sol.converged ? 1 : 0;
    };

    if (workers == 1) {
        for (int i = 0; i < n_samples; ++i) label(i);
        return data;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n_samples; i += workers) label(i);
        });
    for (auto& t : pool) t.join();
    return data;
}

LayerSpec make_layer_spec(const SystemConfig& cfg, const std::vector<int>& hidden) {
    LayerSpec spec;
    spec.sizes.push_back(feature_dim(cfg.m_cellular, cfg.k_v2v, cfg.feature_layout));
    spec.sizes.insert(spec.sizes.end(), hidden.begin(), hidden.end());
    spec.sizes.push_back(cfg.users());
    spec.validate();
    return spec;
}

Eigen::VectorXd output_ceilings(const SystemConfig& cfg) {
    Eigen::VectorXd out(cfg.users());
    for (int i = 0; i < cfg.users(); ++i) out(i) = cfg.pmax(i);
    return out;
}

std::optional<int> TrainReport::epochs_to(double threshold) const {
    for (std::size_t e = 0; e < val_mse.size(); ++e)
        if (val_mse[e] <= threshold) return static_cast<int>(e) + 1;
    return std::nullopt;
}

std::optional<double> TrainReport::seconds_to(double threshold) const {
    double total = 0.0;
    for (std::size_t e = 0; e < val_mse.size(); ++e) {
        total += epoch_seconds[e];
        if (val_mse[e] <= threshold) return total;
    }
    return std::nullopt;
}

TrainResult train(const Dataset& data, const TrainOptions& opts) {
    Rng rng = Rng::substream(opts.seed, Stream::WeightInit, 0);
    Network net = init_weights(make_layer_spec(data.cfg, opts.hidden), output_ceilings(data.cfg), rng);
    return train(data, opts, std::move(net));
}

TrainResult train(const Dataset& data, const TrainOptions& opts, Network net) {
    if (!(opts.val_fraction >= 0.0 && opts.val_fraction < 1.0))
        throw ConfigError("val_fraction must be in [0, 1)");
    if (opts.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(opts.eta >= 0.0) || !std::isfinite(opts.eta)) throw ConfigError("learning rate must be >= 0");
    if (net.spec().n_in() != data.feature_width())
        throw ShapeError(fmt::format("network input width {} does not match dataset feature width {}",
                                     net.spec().n_in(), data.feature_width()));
    if (net.spec().n_out() != data.targets.cols())
        throw ShapeError(fmt::format("network output width {} does not match {} users",
                                     net.spec().n_out(), data.targets.cols()));

    const int n = data.size();
    const int val_rows = static_cast<int>(std::ceil(opts.val_fraction * n));
    const int train_rows = n - val_rows;
    if (opts.batch_size < 1 || opts.batch_size > train_rows)
        throw ConfigError(fmt::format("batch size {} must be in [1, {}] (training split size)",
                                      opts.batch_size, train_rows));

    // column-per-sample copies for batching
    const Eigen::MatrixXd x_train = data.features.topRows(train_rows).transpose();
    const Eigen::MatrixXd y_train = data.targets.topRows(train_rows).transpose();
    const Eigen::MatrixXd x_val = data.features.bottomRows(val_rows).transpose();
    const Eigen::MatrixXd y_val = data.targets.bottomRows(val_rows).transpose();

    TrainReport report;
    report.options = opts;
    report.train_rows = train_rows;
    report.val_rows = val_rows;
    report.initial_train_mse = split_mse(net, x_train, y_train);
    report.initial_val_mse = split_mse(net, x_val, y_val);

    OptimizerState state = OptimizerState::for_network(net, opts.eta);
    std::vector<int> order(static_cast<std::size_t>(train_rows));
    std::iota(order.begin(), order.end(), 0);
    const int batches = train_rows / opts.batch_size;
    Eigen::MatrixXd xb(x_train.rows(), opts.batch_size);
    Eigen::MatrixXd yb(y_train.rows(), opts.batch_size);

    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        const auto start = Clock::now();
        Rng rng = Rng::substream(opts.seed, Stream::Shuffle, static_cast<std::uint64_t>(epoch));
        shuffle(order, rng);
        for (int b = 0; b < batches; ++b) {
            for (int s = 0; s < opts.batch_size; ++s) {
                const int row = order[static_cast<std::size_t>(b * opts.batch_size + s)];
                xb.col(s) = x_train.col(row);
                yb.col(s) = y_train.col(row);
            }
            const BatchTrace trace = forward_batch(net, xb);
            const Gradients grads = backward_batch(net, trace, yb);
            rmsprop_step(net, grads, state);
            ++report.optimizer_steps;
        }
        report.epoch_seconds.push_back(seconds_since(start));
        report.train_mse.push_back(split_mse(net, x_train, y_train));
        report.val_mse.push_back(split_mse(net, x_val, y_val));
        if (!std::isfinite(report.train_mse.back()) || !weights_finite(net)) {
            report.diverged = true;
            break;
        }
    }
    return {std::move(net), std::move(report)};
}

std::vector<CrossValCell> cross_validate(const Dataset& data, const TrainOptions& base,
                                         const std::vector<int>& batch_sizes,
                                         const std::vector<double>& etas) {
    Rng rng = Rng::substream(base.seed, Stream::WeightInit, 0);
    const Network initial =
        init_weights(make_layer_spec(data.cfg, base.hidden), output_ceilings(data.cfg), rng);

    std::vector<CrossValCell> grid;
    for (double eta : etas) {
        for (int batch : batch_sizes) {
            CrossValCell cell;
            cell.batch_size = batch;
            cell.eta = eta;
            TrainOptions opts = base;
            opts.batch_size = batch;
            opts.eta = eta;
            try {
                cell.report = train(data, opts, initial).report;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            grid.push_back(std::move(cell));
        }
    }
    return grid;
}

double PdfTable::integral() const {
    double total = 0.0;
    for (std::size_t b = 0; b < density.size(); ++b) total += density[b] * (edges[b + 1] - edges[b]);
    return total;
}

CdfTable empirical_cdf(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    CdfTable table;
    const auto n = static_cast<double>(samples.size());
    table.value = std::move(samples);
    table.cumulative.resize(table.value.size());
    for (std::size_t i = 0; i < table.value.size(); ++i)
        table.cumulative[i] = static_cast<double>(i + 1) / n;
    return table;
}

PdfTable histogram_pdf(const std::vector<double>& samples, double lo, double hi, int bins) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    if (!(hi > lo)) hi = lo + 1.0;
    PdfTable table;
    const double width = (hi - lo) / bins;
    table.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int b = 0; b <= bins; ++b) table.edges[static_cast<std::size_t>(b)] = lo + width * b;
    table.edges.back() = hi;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double x : samples) {
        auto b = static_cast<long>(std::floor((x - lo) / width));
        b = std::clamp<long>(b, 0, bins - 1);
        ++counts[static_cast<std::size_t>(b)];
    }
    const auto n = static_cast<double>(samples.size());
    table.density.resize(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b)
        table.density[b] = static_cast<double>(counts[b]) / (n * (table.edges[b + 1] - table.edges[b]));
    return table;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ConfigError("ks_distance needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = static_cast<double>(a.size());
    const auto nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

Eigen::VectorXd column_mean(const RowMatrix& m) {
    return m.colwise().mean().transpose();
}

double constant_predictor_mse(const RowMatrix& targets, const Eigen::VectorXd& constant) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < targets.rows(); ++i)
        total += mse_loss(constant, targets.row(i).transpose());
    return total / static_cast<double>(targets.rows());
}

EvalReport evaluate(const Network& net, const Dataset& test, const EvalOptions& opts) {
    if (net.spec().n_in() != test.feature_width())
        throw ShapeError(fmt::format(
            "model input width {} does not match dataset feature width {} (layout {})",
            net.spec().n_in(), test.feature_width(), to_string(test.cfg.feature_layout)));
    if (net.spec().n_out() != test.cfg.users())
        throw ShapeError(fmt::format("model output width {} does not match M+K = {}",
                                     net.spec().n_out(), test.cfg.users()));
    const int n = test.size();
    if (n < 1) throw ConfigError("evaluate needs at least one test sample");

    EvalReport rep;
    const RowMatrix predicted = predict_rows(net, test.features);
    rep.dnn_rate.resize(static_cast<std::size_t>(n));
    rep.wmmse_rate.resize(static_cast<std::size_t>(n));
    rep.sample_mse.resize(static_cast<std::size_t>(n));
    std::vector<ChannelRealization> reals;
    if (opts.timing) reals.reserve(static_cast<std::size_t>(n));

    for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        ChannelRealization real = test.realization(i);
        const Eigen::VectorXd p = predicted.row(i).transpose();
        rep.dnn_rate[ui] = weighted_sum_rate(link_gain_matrix(real), p, test.cfg);
        rep.wmmse_rate[ui] = test.label_rate(i);
        rep.sample_mse[ui] = mse_loss(p, test.targets.row(i).transpose());
        if (opts.timing) reals.push_back(std::move(real));
    }

    if (opts.timing) {
        rep.infer_us.resize(static_cast<std::size_t>(n));
        rep.solve_us.resize(static_cast<std::size_t>(n));
        // warm-up, excluded from the measurements
        volatile double sink = predict(net, test.features.row(0).transpose()).sum();
        sink = sink + solve(reals[0], test.cfg, test.solver).sum_rate;
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const Eigen::VectorXd x = test.features.row(i).transpose();
            auto start = Clock::now();
            const Eigen::VectorXd p = predict(net, x);
            rep.infer_us[ui] = micros_since(start);
            sink = sink + p(0);
            start = Clock::now();
            const WmmseSolution sol = solve(reals[ui], test.cfg, test.solver);
            rep.solve_us[ui] = micros_since(start);
            sink = sink + sol.sum_rate;
        }
        auto mean = [](const std::vector<double>& v) {
            return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        };
        rep.mean_infer_us = mean(rep.infer_us);
        rep.mean_solve_us = mean(rep.solve_us);
    }

    const auto nd = static_cast<double>(n);
    rep.test_mse = std::accumulate(rep.sample_mse.begin(), rep.sample_mse.end(), 0.0) / nd;
    rep.mean_dnn_rate = std::accumulate(rep.dnn_rate.begin(), rep.dnn_rate.end(), 0.0) / nd;
    rep.mean_wmmse_rate = std::accumulate(rep.wmmse_rate.begin(), rep.wmmse_rate.end(), 0.0) / nd;
    rep.mean_ratio = rep.mean_wmmse_rate > 0.0 ? rep.mean_dnn_rate / rep.mean_wmmse_rate : 0.0;
    rep.ks = ks_distance(rep.dnn_rate, rep.wmmse_rate);
    rep.cdf_dnn = empirical_cdf(rep.dnn_rate);
    rep.cdf_wmmse = empirical_cdf(rep.wmmse_rate);
    const double lo = std::min(rep.cdf_dnn.value.front(), rep.cdf_wmmse.value.front());
    const double hi = std::max(rep.cdf_dnn.value.back(), rep.cdf_wmmse.value.back());
    rep.pdf_dnn = histogram_pdf(rep.dnn_rate, lo, hi, opts.pdf_bins);
    rep.pdf_wmmse = histogram_pdf(rep.wmmse_rate, lo, hi, opts.pdf_bins);
    return rep;
}

}  // namespace v2x
