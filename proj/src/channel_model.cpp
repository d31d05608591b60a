#include "v2xalloc/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "v2xalloc/error.hpp"

namespace v2x {

namespace {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point uniform_in_disc(double radius, Rng& rng) {
    const double r = radius * std::sqrt(rng.uniform());
    const double theta = 2.0 * std::numbers::pi * rng.uniform();
    return {r * std::cos(theta), r * std::sin(theta)};
}

ChannelRealization allocate(int m, int k) {
    ChannelRealization real;
    real.hc.resize(m);
    real.hvb.resize(k);
    real.gd.resize(k);
    real.gcross.resize(k, k);
    real.hcv.resize(m, k);
    return real;
}

// Shared draw order for both channel modes.
template <typename GainFn>
void fill_gains(ChannelRealization& real, GainFn&& gain) {
    const int m = real.m();
    const int k = real.k();
    for (int i = 0; i < m; ++i) real.hc(i) = gain(0, i, 0);
    for (int i = 0; i < k; ++i) real.hvb(i) = gain(1, i, 0);
    for (int l = 0; l < k; ++l)
        for (int j = 0; j < k; ++j) real.gcross(l, j) = gain(2, l, j);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) real.hcv(i, j) = gain(3, i, j);
    real.gd = real.gcross.diagonal();
}

}  // namespace

double channel_gain(double fast_fade, double shadow, double pathloss_const, double distance_m,
                    double pathloss_exp) {
    if (!(distance_m > 0.0)) throw std::domain_error("channel_gain: distance must be > 0");
    if (!(fast_fade > 0.0) || !(shadow > 0.0) || !(pathloss_const > 0.0) || !(pathloss_exp > 0.0))
        throw std::domain_error("channel_gain: all factors must be > 0");
    return fast_fade * shadow * pathloss_const * std::pow(distance_m, -pathloss_exp);
}

double draw_link_gain(const GeometricParams& geo, double distance_m, Rng& rng) {
    const double fading = rng.exponential();
    const double shadow = std::pow(10.0, geo.shadow_sigma_db * rng.normal() / 10.0);
    // exponential() can return exactly 0 with probability 2^-53
    if (fading == 0.0) return 0.0;
    return channel_gain(fading, shadow, geo.pathloss_const, std::max(distance_m, 1.0),
                        geo.pathloss_exp);
}

ChannelRealization sample_realization(const SystemConfig& cfg, Rng& rng) {
    const int m = cfg.m_cellular;
    const int k = cfg.k_v2v;
    ChannelRealization real = allocate(m, k);

    if (cfg.channel_mode == ChannelMode::IidExponential) {
        fill_gains(real, [&](int, int, int) { return rng.exponential(); });
        return real;
    }

    const GeometricParams& geo = cfg.geo.value();
    const Point bs{};
    std::vector<Point> cu(static_cast<std::size_t>(m));
    std::vector<Point> vtx(static_cast<std::size_t>(k));
    std::vector<Point> vrx(static_cast<std::size_t>(k));
    for (auto& p : cu) p = uniform_in_disc(geo.cell_radius_m, rng);
    for (auto& p : vtx) p = uniform_in_disc(geo.cell_radius_m, rng);
    for (std::size_t i = 0; i < vrx.size(); ++i) {
        const double d = rng.uniform(geo.v2v_dist_min_m, geo.v2v_dist_max_m);
        const double theta = 2.0 * std::numbers::pi * rng.uniform();
        vrx[i] = {vtx[i].x + d * std::cos(theta), vtx[i].y + d * std::sin(theta)};
    }

    fill_gains(real, [&](int block, int a, int b) {
        const auto ua = static_cast<std::size_t>(a);
        const auto ub = static_cast<std::size_t>(b);
        double d = 0.0;
        switch (block) {
            case 0: d = distance(cu[ua], bs); break;
            case 1: d = distance(vtx[ua], bs); break;
            case 2: d = distance(vtx[ua], vrx[ub]); break;
            default: d = distance(cu[ua], vrx[ub]); break;
        }
        return draw_link_gain(geo, d, rng);
    });
    return real;
}

ChannelRealization sample_realization(const SystemConfig& cfg, std::uint64_t seed,
                                      std::uint64_t index) {
    Rng rng = Rng::substream(seed, Stream::Channel, index);
    return sample_realization(cfg, rng);
}

int feature_dim(int m, int k, FeatureLayout layout) {
    if (layout == FeatureLayout::PaperCompat) return m + k + m * k;
    return m + 2 * k + k * k + m * k;
}

Eigen::VectorXd flatten_features(const ChannelRealization& real, FeatureLayout layout) {
    const int m = real.m();
    const int k = real.k();
    Eigen::VectorXd out(feature_dim(m, k, layout));
    int pos = 0;
    auto put_vec = [&](const Eigen::VectorXd& v) {
        out.segment(pos, v.size()) = v;
        pos += static_cast<int>(v.size());
    };
    auto put_mat = [&](const Eigen::MatrixXd& a) {
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c) out(pos++) = a(r, c);
    };
    put_vec(real.hc);
    if (layout == FeatureLayout::Full) {
        put_vec(real.hvb);
        put_vec(real.gd);
        put_mat(real.gcross);
    } else {
        put_vec(real.gd);
    }
    put_mat(real.hcv);
    return out;
}

ChannelRealization unflatten_features(const Eigen::Ref<const Eigen::VectorXd>& features, int m,
                                      int k, FeatureLayout layout) {
    if (features.size() != feature_dim(m, k, layout))
        throw ShapeError("unflatten_features: got " + std::to_string(features.size()) +
                         " features, expected " + std::to_string(feature_dim(m, k, layout)));
    ChannelRealization real = allocate(m, k);
    Eigen::Index pos = 0;
    auto take_vec = [&](Eigen::VectorXd& v) {
        v = features.segment(pos, v.size());
        pos += v.size();
    };
    auto take_mat = [&](Eigen::MatrixXd& a) {
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c) a(r, c) = features(pos++);
    };
    take_vec(real.hc);
    if (layout == FeatureLayout::Full) {
        take_vec(real.hvb);
        take_vec(real.gd);
        take_mat(real.gcross);
        real.gcross.diagonal() = real.gd;
    } else {
        real.hvb.setZero();
        take_vec(real.gd);
        real.gcross.setZero();
        real.gcross.diagonal() = real.gd;
    }
    take_mat(real.hcv);
    return real;
}

Eigen::MatrixXd link_gain_matrix(const ChannelRealization& real) {
    const int m = real.m();
    const int k = real.k();
    Eigen::MatrixXd g(m + k, m + k);
    // cellular receivers all sit at the BS
    for (int j = 0; j < m; ++j) {
        g.block(0, j, m, 1) = real.hc;
        g.block(m, j, k, 1) = real.hvb;
    }
    g.block(0, m, m, k) = real.hcv;
    g.block(m, m, k, k) = real.gcross;
    return g;
}

}  // namespace v2x
