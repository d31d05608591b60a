#pragma once

#include <Eigen/Dense>

#include "v2xalloc/channel_model.hpp"
#include "v2xalloc/config.hpp"

namespace v2x {

/// Transmit powers in watts.
struct PowerProfile {
    Eigen::VectorXd pc;  // M cellular
    Eigen::VectorXd pv;  // K V2V

    /// [pc | pv]
    Eigen::VectorXd joined() const;
    static PowerProfile split(const Eigen::Ref<const Eigen::VectorXd>& joint, int m);
    bool feasible(const SystemConfig& cfg) const;
};

/// WMMSE variables for all M+K users, cellular first.
struct Amplitudes {
    Eigen::VectorXd v;  // transmit amplitudes, sqrt(watts)
    Eigen::VectorXd u;  // receiver gains
    Eigen::VectorXd w;  // MSE weights, > 0

    PowerProfile power(int m) const;
};

enum class LinkClass { Cellular, V2V };

struct UserRef {
    LinkClass cls;
    int index;

    int joint(const SystemConfig& cfg) const {
        return cls == LinkClass::Cellular ? index : cfg.m_cellular + index;
    }
};

/// SINR at the BS for CU m. Throws std::out_of_range for a bad index.
double sinr_cellular(const ChannelRealization& real, const PowerProfile& p,
                     const SystemConfig& cfg, int m);

/// SINR at V2V receiver k, with V2V interference through gcross(l, k).
double sinr_v2v(const ChannelRealization& real, const PowerProfile& p, const SystemConfig& cfg,
                int k);

/// SINR of every user given the joint gain matrix and joint powers.
Eigen::VectorXd sinr_all(const Eigen::MatrixXd& gains, const Eigen::VectorXd& power,
                         double noise_var);

/// sum_i alpha_i * ln(1 + sinr_i), in nats.
double weighted_sum_rate(const ChannelRealization& real, const PowerProfile& p,
                         const SystemConfig& cfg);
double weighted_sum_rate(const Eigen::MatrixXd& gains, const Eigen::VectorXd& power,
                         const SystemConfig& cfg);

/// Estimation MSE of one user's symbol. Gains enter as sqrt of the stored
/// power gains.
double mse_user(const ChannelRealization& real, const Amplitudes& amp, const SystemConfig& cfg,
                UserRef user);

/// MSE of every user given the joint gain matrix.
Eigen::VectorXd mse_all(const Eigen::MatrixXd& gains, const Amplitudes& amp, double noise_var);

/// sum_i alpha_i * (w_i * mse_i - ln w_i)
double wmmse_objective(const ChannelRealization& real, const Amplitudes& amp,
                       const SystemConfig& cfg);
double wmmse_objective(const Eigen::MatrixXd& gains, const Amplitudes& amp,
                       const SystemConfig& cfg);

/// alpha as one joint vector.
Eigen::VectorXd priority_weights(const SystemConfig& cfg);

}  // namespace v2x
