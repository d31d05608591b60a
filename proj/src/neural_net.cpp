#include "v2xalloc/neural_net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "v2xalloc/error.hpp"

namespace v2x {

void LayerSpec::validate() const {
    if (sizes.size() < 2) throw ShapeError("layer spec needs at least input and output widths");
    for (int s : sizes)
        if (s < 1) throw ShapeError("every layer width must be >= 1");
}

Network::Network(LayerSpec spec, Eigen::VectorXd pmax_out)
    : spec_(std::move(spec)), pmax_out_(std::move(pmax_out)) {
    spec_.validate();
    if (pmax_out_.size() != spec_.n_out())
        throw ShapeError("pmax_out has " + std::to_string(pmax_out_.size()) +
                         " entries, network has " + std::to_string(spec_.n_out()) + " outputs");
    weights_.reserve(static_cast<std::size_t>(spec_.layers()));
    for (int l = 0; l < spec_.layers(); ++l)
        weights_.push_back(Eigen::MatrixXd::Zero(spec_.sizes[l + 1], spec_.sizes[l]));
}

OptimizerState OptimizerState::for_network(const Network& net, double eta,
                                           double epsilon_smooth) {
    OptimizerState state;
    state.eta = eta;
    state.epsilon_smooth = epsilon_smooth;
    for (const auto& w : net.weights())
        state.running_sq_grad.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    return state;
}

Network init_weights(const LayerSpec& spec, const Eigen::VectorXd& pmax_out, Rng& rng) {
    Network net(spec, pmax_out);
    auto& weights = net.mutable_weights();
    for (auto& w : weights) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.normal() * scale;
    }
    return net;
}

namespace {

void check_input(const Network& net, Eigen::Index rows) {
    if (rows != net.spec().n_in())
        throw ShapeError("input has " + std::to_string(rows) + " features, network expects " +
                         std::to_string(net.spec().n_in()));
}

template <typename Trace>
void check_trace(const Network& net, const Trace& trace) {
    if (trace.net != &net || trace.revision != net.revision())
        throw std::logic_error("backward: trace does not belong to the current network state");
}

}  // namespace

ForwardTrace forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
    check_input(net, x.size());
    ForwardTrace trace;
    trace.net = &net;
    trace.revision = net.revision();
    trace.post.emplace_back(x);
    const auto& weights = net.weights();
    const std::size_t last = weights.size() - 1;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        trace.pre.push_back(weights[l] * trace.post.back());
        const Eigen::VectorXd& z = trace.pre.back();
        Eigen::VectorXd y(z.size());
        if (l == last) {
            for (Eigen::Index j = 0; j < z.size(); ++j) y(j) = clamp_output(z(j), net.pmax_out()(j));
        } else {
            y = z.cwiseMax(0.0);
        }
        trace.post.push_back(std::move(y));
    }
    return trace;
}

BatchTrace forward_batch(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& x) {
    check_input(net, x.rows());
    BatchTrace trace;
    trace.net = &net;
    trace.revision = net.revision();
    trace.post.emplace_back(x);
    const auto& weights = net.weights();
    const std::size_t last = weights.size() - 1;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        trace.pre.push_back(weights[l] * trace.post.back());
        const Eigen::MatrixXd& z = trace.pre.back();
        Eigen::MatrixXd y(z.rows(), z.cols());
        if (l == last) {
            for (Eigen::Index b = 0; b < z.cols(); ++b)
                for (Eigen::Index j = 0; j < z.rows(); ++j)
                    y(j, b) = clamp_output(z(j, b), net.pmax_out()(j));
        } else {
            y = z.cwiseMax(0.0);
        }
        trace.post.push_back(std::move(y));
    }
    return trace;
}

double mse_loss(const Eigen::Ref<const Eigen::VectorXd>& out,
                const Eigen::Ref<const Eigen::VectorXd>& target) {
    if (out.size() != target.size() || out.size() == 0)
        throw ShapeError("mse_loss: output and target sizes differ");
    return (out - target).squaredNorm() / static_cast<double>(out.size());
}

namespace {

// delta: dLoss/dpre for the output layer on entry; columns are samples.
Gradients backprop(const Network& net, const std::vector<Eigen::MatrixXd>& pre,
                   const std::vector<Eigen::MatrixXd>& post, Eigen::MatrixXd delta) {
    const auto& weights = net.weights();
    Gradients grads(weights.size());
    for (std::size_t l = weights.size(); l-- > 0;) {
        grads[l] = delta * post[l].transpose();
        if (l == 0) break;
        delta = (weights[l].transpose() * delta).cwiseProduct(
            (pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
    return grads;
}

Eigen::MatrixXd output_delta(const Network& net, const Eigen::MatrixXd& z, const Eigen::MatrixXd& y,
                             const Eigen::Ref<const Eigen::MatrixXd>& target) {
    if (target.rows() != y.rows() || target.cols() != y.cols())
        throw ShapeError("target shape does not match network output");
    const double scale = 2.0 / static_cast<double>(y.rows() * y.cols());
    Eigen::MatrixXd delta(y.rows(), y.cols());
    for (Eigen::Index b = 0; b < y.cols(); ++b)
        for (Eigen::Index j = 0; j < y.rows(); ++j) {
            const bool inside = z(j, b) > 0.0 && z(j, b) < net.pmax_out()(j);
            delta(j, b) = inside ? scale * (y(j, b) - target(j, b)) : 0.0;
        }
    return delta;
}

}  // namespace

Gradients backward(const Network& net, const ForwardTrace& trace,
                   const Eigen::Ref<const Eigen::VectorXd>& target) {
    check_trace(net, trace);
    std::vector<Eigen::MatrixXd> pre(trace.pre.begin(), trace.pre.end());
    std::vector<Eigen::MatrixXd> post(trace.post.begin(), trace.post.end());
    Eigen::MatrixXd delta = output_delta(net, pre.back(), post.back(), target);
    return backprop(net, pre, post, std::move(delta));
}

Gradients backward_batch(const Network& net, const BatchTrace& trace,
                         const Eigen::Ref<const Eigen::MatrixXd>& targets) {
    check_trace(net, trace);
    Eigen::MatrixXd delta = output_delta(net, trace.pre.back(), trace.post.back(), targets);
    return backprop(net, trace.pre, trace.post, std::move(delta));
}

void rmsprop_step(Network& net, const Gradients& grads, OptimizerState& state) {
    if (grads.size() != net.weights().size() ||
        state.running_sq_grad.size() != net.weights().size())
        throw ShapeError("rmsprop_step: layer count mismatch");
    auto& weights = net.mutable_weights();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        auto& w = weights[l];
        auto& e = state.running_sq_grad[l];
        const auto& g = grads[l];
        if (g.rows() != w.rows() || g.cols() != w.cols() || e.rows() != w.rows() ||
            e.cols() != w.cols())
            throw ShapeError("rmsprop_step: gradient shape mismatch in layer " + std::to_string(l));
        e.array() = 0.9 * e.array() + 0.1 * g.array().square();
        w.array() -= state.eta * g.array() / (e.array() + state.epsilon_smooth).sqrt();
    }
}

Eigen::VectorXd predict(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
    check_input(net, x.size());
    const auto& weights = net.weights();
    Eigen::VectorXd a = x;
    for (std::size_t l = 0; l + 1 < weights.size(); ++l) a = (weights[l] * a).cwiseMax(0.0);
    Eigen::VectorXd z = weights.back() * a;
    for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = clamp_output(z(j), net.pmax_out()(j));
    return z;
}

Eigen::MatrixXd predict_rows(const Network& net, const Eigen::Ref<const Eigen::MatrixXd>& x) {
    check_input(net, x.cols());
    const auto& weights = net.weights();
    Eigen::MatrixXd a = x.transpose();
    for (std::size_t l = 0; l + 1 < weights.size(); ++l) a = (weights[l] * a).cwiseMax(0.0);
    Eigen::MatrixXd z = weights.back() * a;
    for (Eigen::Index b = 0; b < z.cols(); ++b)
        for (Eigen::Index j = 0; j < z.rows(); ++j) z(j, b) = clamp_output(z(j, b), net.pmax_out()(j));
    return z.transpose();
}

}  // namespace v2x
