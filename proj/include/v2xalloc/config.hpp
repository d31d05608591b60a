#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace v2x {

enum class ChannelMode { IidExponential, Geometric };
enum class FeatureLayout { Full, PaperCompat };

std::string_view to_string(ChannelMode mode);
std::string_view to_string(FeatureLayout layout);
ChannelMode parse_channel_mode(std::string_view text);
FeatureLayout parse_feature_layout(std::string_view text);

/// Pathloss / shadowing / placement parameters for the geometric channel.
struct GeometricParams {
    double pathloss_const = 1e-3;   // A
    double pathloss_exp = 3.5;      // gamma
    double shadow_sigma_db = 8.0;
    double cell_radius_m = 500.0;
    double v2v_dist_min_m = 10.0;
    double v2v_dist_max_m = 50.0;
};

/// Network dimensions, power budgets and channel-model knobs.
///
/// Users are indexed jointly as 0..M-1 (cellular) followed by M..M+K-1 (V2V)
/// wherever a single per-user vector is used.
struct SystemConfig {
    int m_cellular = 8;
    int k_v2v = 10;
    double pmax_c = 1.0;
    double pmax_v = 1.0;
    double noise_var = 0.1;
    std::vector<double> weight_c;  // length M
    std::vector<double> weight_v;  // length K
    ChannelMode channel_mode = ChannelMode::IidExponential;
    std::optional<GeometricParams> geo;  // engaged iff channel_mode == Geometric
    FeatureLayout feature_layout = FeatureLayout::Full;
    std::uint64_t seed = 0;

    /// M=8, K=10, unit power budgets, noise variance 0.1, unit weights.
    static SystemConfig defaults();

    /// Same as defaults() with the given dimensions; weights sized to match.
    static SystemConfig with_dims(int m, int k);

    int users() const { return m_cellular + k_v2v; }
    double pmax(int user) const { return user < m_cellular ? pmax_c : pmax_v; }
    double weight(int user) const {
        return user < m_cellular ? weight_c[user] : weight_v[user - m_cellular];
    }

    /// Throws ConfigError describing the first violated invariant.
    void validate() const;
};

/// Parse `key = value` text. Core keys (m_cellular, k_v2v, pmax_c, pmax_v,
/// noise_var, channel_mode) are required; weights default to 1, layout to
/// FULL, seed to 0. Geometric keys default in GEOMETRIC mode and are rejected
/// otherwise.
SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

/// Every effective parameter, one `key = value` per line, in the same syntax
/// parse_config accepts.
std::string format_config(const SystemConfig& cfg);

}  // namespace v2x
