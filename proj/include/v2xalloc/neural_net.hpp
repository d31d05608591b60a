#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "v2xalloc/rng.hpp"

namespace v2x {

/// Layer widths [n_in, h_1, ..., h_L, n_out].
struct LayerSpec {
    std::vector<int> sizes;

    int n_in() const { return sizes.front(); }
    int n_out() const { return sizes.back(); }
    int layers() const { return static_cast<int>(sizes.size()) - 1; }
    void validate() const;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Fully connected, bias-free network. Hidden layers use ReLU; the output
/// layer clamps each unit to [0, pmax_out_j].
///
/// Weight matrix l maps width sizes[l] to sizes[l+1] and has shape
/// sizes[l+1] x sizes[l]. Every mutation through mutable_weights() bumps
/// revision(), which invalidates outstanding forward traces.
class Network {
public:
    Network(LayerSpec spec, Eigen::VectorXd pmax_out);

    const LayerSpec& spec() const { return spec_; }
    const Eigen::VectorXd& pmax_out() const { return pmax_out_; }
    const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
    std::vector<Eigen::MatrixXd>& mutable_weights() {
        ++revision_;
        return weights_;
    }
    std::uint64_t revision() const { return revision_; }

    friend bool operator==(const Network& a, const Network& b) {
        return a.spec_ == b.spec_ && a.pmax_out_ == b.pmax_out_ && a.weights_ == b.weights_;
    }

private:
    LayerSpec spec_;
    Eigen::VectorXd pmax_out_;
    std::vector<Eigen::MatrixXd> weights_;
    std::uint64_t revision_ = 0;
};

using Gradients = std::vector<Eigen::MatrixXd>;

/// Pre- and post-activations of one forward pass. post[0] is the input,
/// post.back() the clamped output; pre[l] feeds post[l+1].
struct ForwardTrace {
    std::vector<Eigen::VectorXd> pre;
    std::vector<Eigen::VectorXd> post;
    const Network* net = nullptr;
    std::uint64_t revision = 0;

    const Eigen::VectorXd& output() const { return post.back(); }
};

/// Same as ForwardTrace for a batch; column b is sample b.
struct BatchTrace {
    std::vector<Eigen::MatrixXd> pre;
    std::vector<Eigen::MatrixXd> post;
    const Network* net = nullptr;
    std::uint64_t revision = 0;

    const Eigen::MatrixXd& output() const { return post.back(); }
};

struct OptimizerState {
    std::vector<Eigen::MatrixXd> running_sq_grad;
    double eta = 1e-3;
    double epsilon_smooth = 1e-8;

    static OptimizerState for_network(const Network& net, double eta,
                                      double epsilon_smooth = 1e-8);
};

/// Gaussian weights with each neuron's incoming vector scaled by
/// 1/sqrt(fan-in).
Network init_weights(const LayerSpec& spec, const Eigen::VectorXd& pmax_out, Rng& rng);

/// y = min(max(0, z), pmax) with NaN mapped to 0.
inline double clamp_output(double z, double pmax) {
    if (!(z > 0.0)) return 0.0;
    return z < pmax ? z : pmax;
}

ForwardTrace forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x);
BatchTrace forward_batch(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& x);

/// mean over outputs of squared residuals
double mse_loss(const Eigen::Ref<const Eigen::VectorXd>& out,
                const Eigen::Ref<const Eigen::VectorXd>& target);

/// Exact gradient of mse_loss. ReLU and the output clamp pass gradient only
/// strictly inside their linear region. Throws std::logic_error if the
/// trace came from another network or an older revision of this one.
Gradients backward(const Network& net, const ForwardTrace& trace,
                   const Eigen::Ref<const Eigen::VectorXd>& target);

/// Mean of the per-sample gradients over the batch (targets column-wise).
Gradients backward_batch(const Network& net, const BatchTrace& trace,
                         const Eigen::Ref<const Eigen::MatrixXd>& targets);

/// E <- 0.9 E + 0.1 g^2;  w <- w - eta g / sqrt(E + eps)
void rmsprop_step(Network& net, const Gradients& grads, OptimizerState& state);

Eigen::VectorXd predict(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x);
/// Rows of x are samples; returns one output row per sample.
Eigen::MatrixXd predict_rows(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& x);

inline constexpr const char* kModelMagic = "V2XALLOC-MODEL v1";

/// Text model file: magic line, layer sizes, clamp ceilings, then one line
/// of row-major weights per layer, 17 significant digits.
void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);
std::string format_model(const Network& net);
Network parse_model(std::string_view text);

}  // namespace v2x
