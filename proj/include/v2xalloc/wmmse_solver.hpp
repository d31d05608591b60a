#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "v2xalloc/channel_model.hpp"
#include "v2xalloc/config.hpp"
#include "v2xalloc/rate_model.hpp"

namespace v2x {

enum class InitMode { FullPower, Random };

struct SolverOptions {
    int max_iter = 500;
    double tol = 1e-6;  // on |objective(n) - objective(n-1)|
    InitMode init_mode = InitMode::FullPower;
    std::uint64_t init_seed = 0;  // RANDOM init only

    void validate() const;
};

struct WmmseSolution {
    PowerProfile power;  // v^2
    Amplitudes amp;
    std::vector<double> objective_trace;  // [initial, after sweep 1, ...]
    double sum_rate = 0.0;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;  // some v-update had a zero denominator
};

/// Wiener receiver: u_j = sqrt(g_jj) v_j / (sum_i g_ij v_i^2 + noise).
Eigen::VectorXd update_u(const Eigen::MatrixXd& gains, const Amplitudes& amp, double noise_var);
Eigen::VectorXd update_u(const ChannelRealization& real, const Amplitudes& amp,
                         const SystemConfig& cfg);

/// w_i = 1 / mse_i. Expects u to be the Wiener receiver for the current v.
Eigen::VectorXd update_w(const Eigen::MatrixXd& gains, const Amplitudes& amp, double noise_var);
Eigen::VectorXd update_w(const ChannelRealization& real, const Amplitudes& amp,
                         const SystemConfig& cfg);

struct VUpdate {
    Eigen::VectorXd v;
    bool degenerate = false;
};

/// Exact minimizer of the WMMSE objective over each v_i in [0, sqrt(pmax_i)]
/// with u, w fixed: the stationary point
///   alpha_i w_i u_i sqrt(g_ii) / sum_j alpha_j w_j u_j^2 g_ij
/// clamped to the box. A transmitter whose denominator is zero keeps its
/// current amplitude and the result is flagged degenerate.
VUpdate update_v(const Eigen::MatrixXd& gains, const Amplitudes& amp, const SystemConfig& cfg);
VUpdate update_v(const ChannelRealization& real, const Amplitudes& amp, const SystemConfig& cfg);

/// Initial amplitudes with u and w already matched to v.
Amplitudes initial_amplitudes(const Eigen::MatrixXd& gains, const SystemConfig& cfg,
                              const SolverOptions& opts);

/// One v -> u -> w sweep.
Amplitudes bcd_sweep(const Eigen::MatrixXd& gains, const Amplitudes& amp, const SystemConfig& cfg,
                     bool* degenerate = nullptr);

/// Block coordinate descent on the WMMSE objective until the objective
/// changes by at most opts.tol or opts.max_iter sweeps have run.
WmmseSolution solve(const ChannelRealization& real, const SystemConfig& cfg,
                    const SolverOptions& opts = {});

struct OracleResult {
    PowerProfile power;
    double sum_rate = 0.0;
};

inline constexpr int kOracleMaxUsers = 3;
inline constexpr int kOracleMaxGrid = 501;

/// Exhaustive search of weighted_sum_rate over the uniform per-user grid
/// {0, pmax/(g-1), ..., pmax}. Refuses (std::invalid_argument) when
/// M+K > 3 or the grid is outside [2, 501].
OracleResult brute_force_oracle(const ChannelRealization& real, const SystemConfig& cfg,
                                int grid_points);

}  // namespace v2x
