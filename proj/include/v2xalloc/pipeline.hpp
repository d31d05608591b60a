#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "v2xalloc/channel_model.hpp"
#include "v2xalloc/config.hpp"
#include "v2xalloc/neural_net.hpp"
#include "v2xalloc/wmmse_solver.hpp"

namespace v2x {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// WMMSE-labelled channel snapshots. Row i was generated from channel
/// substream i of `seed`.
struct Dataset {
    SystemConfig cfg;
    SolverOptions solver;
    std::uint64_t seed = 0;
    RowMatrix features;  // N x feature_dim
    RowMatrix targets;   // N x (M+K), powers in watts
    Eigen::VectorXd label_rate;
    std::vector<std::uint8_t> converged;
    std::chrono::system_clock::time_point generated_at{};  // not serialized

    int size() const { return static_cast<int>(features.rows()); }
    int feature_width() const { return static_cast<int>(features.cols()); }
    int nonconverged() const;

    /// Channel snapshot of row i: unflattened for FULL, regenerated from
    /// (cfg, seed, i) and checked against the stored features for
    /// PAPER_COMPAT.
    ChannelRealization realization(int i) const;

    /// Rows [first, first + count) with the same metadata.
    Dataset slice(int first, int count) const;
};

/// Label `n_samples` fresh snapshots. Output is independent of `workers`.
Dataset generate_dataset(const SystemConfig& cfg, int n_samples, const SolverOptions& solver,
                         std::uint64_t seed, int workers = 1);

inline constexpr const char* kDataMagic = "V2XALLOC-DATA v1";

/// Header `V2XALLOC-DATA v1,M=..,K=..,layout=..,seed=..`, column names, then
/// one CSV row per sample with 17 significant digits.
void save_dataset(const Dataset& data, const std::filesystem::path& path);
std::string format_dataset(const Dataset& data);

/// Values the file does not record (power budgets, noise, weights, channel
/// mode) come from `base` when given, else SystemConfig::defaults(). M, K,
/// layout and seed always come from the file and must agree with `base`'s M
/// and K.
Dataset load_dataset(const std::filesystem::path& path,
                     const std::optional<SystemConfig>& base = std::nullopt);
Dataset parse_dataset(std::string_view text,
                      const std::optional<SystemConfig>& base = std::nullopt);

/// [n_in, hidden..., M+K]
LayerSpec make_layer_spec(const SystemConfig& cfg, const std::vector<int>& hidden);
/// pmax_c for the first M outputs, pmax_v for the rest.
Eigen::VectorXd output_ceilings(const SystemConfig& cfg);

struct TrainOptions {
    std::vector<int> hidden{50, 22, 20};
    int batch_size = 100;
    double eta = 1e-3;
    int epochs = 100;
    double val_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct TrainReport {
    TrainOptions options;
    int train_rows = 0;
    int val_rows = 0;
    std::vector<double> train_mse;      // full training split, after each epoch
    std::vector<double> val_mse;        // NaN when there is no validation split
    std::vector<double> epoch_seconds;  // wall clock
    std::int64_t optimizer_steps = 0;
    double initial_train_mse = 0.0;
    double initial_val_mse = 0.0;
    bool diverged = false;

    int epochs_run() const { return static_cast<int>(train_mse.size()); }
    /// First epoch (1-based) whose validation MSE is <= threshold.
    std::optional<int> epochs_to(double threshold) const;
    std::optional<double> seconds_to(double threshold) const;
};

struct TrainResult {
    Network net;
    TrainReport report;
};

/// Mini-batch RMSprop on the leading rows; the last ceil(val_fraction * N)
/// rows are held out. Each epoch reshuffles the training rows with the
/// epoch's substream and drops the incomplete final batch. Stops early with
/// report.diverged set if the loss or any weight becomes non-finite.
TrainResult train(const Dataset& data, const TrainOptions& opts);

/// Same, starting from the given network instead of a fresh init.
TrainResult train(const Dataset& data, const TrainOptions& opts, Network initial);

struct CrossValCell {
    int batch_size = 0;
    double eta = 0.0;
    std::optional<TrainReport> report;
    std::string error;  // set when training threw

    bool failed() const { return !report || report->diverged; }
};

/// One training run per (batch size, eta), all from the same initial
/// weights. A failing cell is recorded and the grid continues.
std::vector<CrossValCell> cross_validate(const Dataset& data, const TrainOptions& base,
                                         const std::vector<int>& batch_sizes,
                                         const std::vector<double>& etas);

struct CdfTable {
    std::vector<double> value;
    std::vector<double> cumulative;
};

struct PdfTable {
    std::vector<double> edges;    // bins + 1
    std::vector<double> density;  // bins

    double bin_center(std::size_t b) const { return 0.5 * (edges[b] + edges[b + 1]); }
    double integral() const;
};

CdfTable empirical_cdf(std::vector<double> samples);
PdfTable histogram_pdf(const std::vector<double>& samples, double lo, double hi, int bins);
/// sup_x |F_a(x) - F_b(x)| of the two empirical CDFs.
double ks_distance(std::vector<double> a, std::vector<double> b);

struct EvalOptions {
    bool timing = false;
    int pdf_bins = 40;
};

struct EvalReport {
    std::vector<double> dnn_rate;
    std::vector<double> wmmse_rate;
    std::vector<double> sample_mse;
    std::vector<double> infer_us;  // empty unless timing
    std::vector<double> solve_us;  // empty unless timing
    double test_mse = 0.0;
    double mean_dnn_rate = 0.0;
    double mean_wmmse_rate = 0.0;
    double mean_ratio = 0.0;
    double ks = 0.0;
    double mean_infer_us = 0.0;
    double mean_solve_us = 0.0;
    CdfTable cdf_dnn, cdf_wmmse;
    PdfTable pdf_dnn, pdf_wmmse;
};

/// DNN powers versus the stored WMMSE labels. Throws ShapeError when the
/// network does not fit the dataset's feature width or user count.
EvalReport evaluate(const Network& net, const Dataset& test, const EvalOptions& opts = {});

/// Mean over rows of mse_loss(constant, target row).
double constant_predictor_mse(const RowMatrix& targets, const Eigen::VectorXd& constant);
Eigen::VectorXd column_mean(const RowMatrix& m);

void write_train_report(const TrainReport& report, const std::filesystem::path& path);
void write_xval_summary(const std::vector<CrossValCell>& grid, double threshold,
                        const std::filesystem::path& path);
/// per_sample.csv, cdf_dnn.csv, cdf_wmmse.csv, pdf_dnn.csv, pdf_wmmse.csv,
/// summary.csv under `dir`.
void write_eval_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace v2x
