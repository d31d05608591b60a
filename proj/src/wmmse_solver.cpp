#include "v2xalloc/wmmse_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "v2xalloc/error.hpp"
#include "v2xalloc/rng.hpp"

namespace v2x {

void SolverOptions::validate() const {
    if (max_iter < 1) throw ConfigError("solver max_iter must be >= 1");
    if (!(tol > 0.0)) throw ConfigError("solver tol must be > 0");
}

Eigen::VectorXd update_u(const Eigen::MatrixXd& gains, const Amplitudes& amp, double noise_var) {
    const Eigen::Index n = amp.v.size();
    const Eigen::VectorXd v2 = amp.v.array().square();
    Eigen::VectorXd u(n);
    for (Eigen::Index j = 0; j < n; ++j)
        u(j) = std::sqrt(gains(j, j)) * amp.v(j) / (gains.col(j).dot(v2) + noise_var);
    return u;
}

Eigen::VectorXd update_u(const ChannelRealization& real, const Amplitudes& amp,
                         const SystemConfig& cfg) {
    return update_u(link_gain_matrix(real), amp, cfg.noise_var);
}

Eigen::VectorXd update_w(const Eigen::MatrixXd& gains, const Amplitudes& amp, double noise_var) {
    return mse_all(gains, amp, noise_var).cwiseInverse();
}

Eigen::VectorXd update_w(const ChannelRealization& real, const Amplitudes& amp,
                         const SystemConfig& cfg) {
    return update_w(link_gain_matrix(real), amp, cfg.noise_var);
}

VUpdate update_v(const Eigen::MatrixXd& gains, const Amplitudes& amp, const SystemConfig& cfg) {
    const Eigen::Index n = amp.v.size();
    // c_j = alpha_j w_j u_j^2, the curvature contribution of receiver j
    Eigen::VectorXd c(n);
    for (Eigen::Index j = 0; j < n; ++j)
        c(j) = cfg.weight(static_cast<int>(j)) * amp.w(j) * amp.u(j) * amp.u(j);

    VUpdate out{amp.v, false};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double denom = gains.row(i).dot(c);
        if (!(denom > 0.0)) {
            out.degenerate = true;
            continue;
        }
        const double numer =
            cfg.weight(static_cast<int>(i)) * amp.w(i) * amp.u(i) * std::sqrt(gains(i, i));
        out.v(i) = std::clamp(numer / denom, 0.0, std::sqrt(cfg.pmax(static_cast<int>(i))));
    }
    return out;
}

VUpdate update_v(const ChannelRealization& real, const Amplitudes& amp, const SystemConfig& cfg) {
    return update_v(link_gain_matrix(real), amp, cfg);
}

Amplitudes initial_amplitudes(const Eigen::MatrixXd& gains, const SystemConfig& cfg,
                              const SolverOptions& opts) {
    const int n = cfg.users();
    Amplitudes amp;
    amp.v.resize(n);
    if (opts.init_mode == InitMode::FullPower) {
        for (int i = 0; i < n; ++i) amp.v(i) = std::sqrt(cfg.pmax(i));
    } else {
        Rng rng = Rng::substream(opts.init_seed, Stream::SolverInit, 0);
        for (int i = 0; i < n; ++i) amp.v(i) = std::sqrt(cfg.pmax(i)) * rng.uniform();
    }
    amp.u = update_u(gains, amp, cfg.noise_var);
    amp.w = update_w(gains, amp, cfg.noise_var);
    return amp;
}

Amplitudes bcd_sweep(const Eigen::MatrixXd& gains, const Amplitudes& amp, const SystemConfig& cfg,
                     bool* degenerate) {
    Amplitudes next = amp;
    VUpdate vu = update_v(gains, amp, cfg);
    next.v = std::move(vu.v);
    next.u = update_u(gains, next, cfg.noise_var);
    next.w = update_w(gains, next, cfg.noise_var);
    if (degenerate) *degenerate = vu.degenerate;
    return next;
}

WmmseSolution solve(const ChannelRealization& real, const SystemConfig& cfg,
                    const SolverOptions& opts) {
    opts.validate();
    const Eigen::MatrixXd gains = link_gain_matrix(real);

    WmmseSolution sol;
    sol.amp = initial_amplitudes(gains, cfg, opts);
    double prev = wmmse_objective(gains, sol.amp, cfg);
    sol.objective_trace.reserve(static_cast<std::size_t>(std::min(opts.max_iter, 64)) + 1);
    sol.objective_trace.push_back(prev);

    for (int it = 1; it <= opts.max_iter; ++it) {
        bool degenerate = false;
        sol.amp = bcd_sweep(gains, sol.amp, cfg, &degenerate);
        sol.degenerate = sol.degenerate || degenerate;
        const double obj = wmmse_objective(gains, sol.amp, cfg);
        sol.objective_trace.push_back(obj);
        sol.iterations = it;
        if (std::abs(obj - prev) <= opts.tol) {
            sol.converged = true;
            break;
        }
        prev = obj;
    }

    const Eigen::VectorXd p = sol.amp.v.array().square();
    sol.power = PowerProfile::split(p, cfg.m_cellular);
    // v <= sqrt(pmax) does not survive squaring exactly in floating point
    sol.power.pc = sol.power.pc.cwiseMin(cfg.pmax_c);
    sol.power.pv = sol.power.pv.cwiseMin(cfg.pmax_v);
    sol.sum_rate = weighted_sum_rate(gains, sol.power.joined(), cfg);
    return sol;
}

OracleResult brute_force_oracle(const ChannelRealization& real, const SystemConfig& cfg,
                                int grid_points) {
    const int n = cfg.users();
    if (n > kOracleMaxUsers || grid_points < 2 || grid_points > kOracleMaxGrid) {
        throw std::invalid_argument(fmt::format(
            "brute_force_oracle: {} users x {} grid points would evaluate {:.3g} profiles; "
            "limits are M+K <= {} and 2 <= grid <= {}",
            n, grid_points, std::pow(static_cast<double>(grid_points), n), kOracleMaxUsers,
            kOracleMaxGrid));
    }
    const Eigen::MatrixXd gains = link_gain_matrix(real);

    auto level = [&](int user, int step) {
        if (step == grid_points - 1) return cfg.pmax(user);
        return cfg.pmax(user) * static_cast<double>(step) / (grid_points - 1);
    };

    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd p(n);
    Eigen::VectorXd best_p = Eigen::VectorXd::Zero(n);
    double best = -1.0;
    while (true) {
        for (int i = 0; i < n; ++i) p(i) = level(i, idx[static_cast<std::size_t>(i)]);
        const double rate = weighted_sum_rate(gains, p, cfg);
        if (rate > best) {
            best = rate;
            best_p = p;
        }
        int d = 0;
        while (d < n && ++idx[static_cast<std::size_t>(d)] == grid_points) {
            idx[static_cast<std::size_t>(d)] = 0;
            ++d;
        }
        if (d == n) break;
    }
    return {PowerProfile::split(best_p, cfg.m_cellular), best};
}

}  // namespace v2x
