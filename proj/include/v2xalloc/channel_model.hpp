#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "v2xalloc/config.hpp"
#include "v2xalloc/rng.hpp"

namespace v2x {

/// Channel power gains of one network snapshot.
struct ChannelRealization {
    Eigen::VectorXd hc;      // M: CU m -> BS
    Eigen::VectorXd hvb;     // K: V2V transmitter k -> BS
    Eigen::VectorXd gd;      // K: V2V direct link k
    Eigen::MatrixXd gcross;  // K x K: (l, k) = V2V transmitter l -> V2V receiver k
    Eigen::MatrixXd hcv;     // M x K: (m, k) = CU m -> V2V receiver k

    int m() const { return static_cast<int>(hc.size()); }
    int k() const { return static_cast<int>(gd.size()); }

    friend bool operator==(const ChannelRealization&, const ChannelRealization&) = default;
};

/// Power gain G * beta * A * d^-gamma. Throws std::domain_error unless every
/// argument is strictly positive.
double channel_gain(double fast_fade, double shadow, double pathloss_const, double distance_m,
                    double pathloss_exp);

/// One geometric link gain at a given distance: unit-mean exponential fast
/// fading times log-normal shadowing, then channel_gain. Distances below
/// 1 m are treated as 1 m.
double draw_link_gain(const GeometricParams& geo, double distance_m, Rng& rng);

/// Draw a snapshot. IID_EXPONENTIAL: every gain is an independent unit-mean
/// exponential, drawn in the order hc, hvb, gcross (row-major), hcv; gd is
/// the diagonal of gcross. GEOMETRIC: BS at the origin, CUs and V2V
/// transmitters uniform in the cell disc, each V2V receiver at a uniform
/// distance in [v2v_dist_min_m, v2v_dist_max_m] and uniform bearing from its
/// transmitter; gains then follow draw_link_gain in the same order.
ChannelRealization sample_realization(const SystemConfig& cfg, Rng& rng);

/// Snapshot `index` of the dataset generated with `seed`.
ChannelRealization sample_realization(const SystemConfig& cfg, std::uint64_t seed,
                                      std::uint64_t index);

int feature_dim(int m, int k, FeatureLayout layout);

/// FULL:         [hc | hvb | gd | gcross row-major | hcv row-major]
/// PAPER_COMPAT: [hc | gd | hcv row-major]
Eigen::VectorXd flatten_features(const ChannelRealization& real, FeatureLayout layout);

/// Inverse of flatten_features. For PAPER_COMPAT the unobserved gains (hvb
/// and off-diagonal gcross) come back as zero, so only
/// flatten(unflatten(x)) == x is guaranteed in that layout.
ChannelRealization unflatten_features(const Eigen::Ref<const Eigen::VectorXd>& features, int m,
                                      int k, FeatureLayout layout);

/// Joint (M+K) x (M+K) gain matrix, (i, j) = power gain from transmitter i
/// to the receiver of user j. Users are ordered cellular first.
Eigen::MatrixXd link_gain_matrix(const ChannelRealization& real);

}  // namespace v2x
