#include "v2xalloc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "v2xalloc/error.hpp"

namespace v2x {

namespace {

constexpr std::string_view kGeoKeys[] = {"pathloss_const", "pathloss_exp",   "shadow_sigma_db",
                                         "cell_radius_m",  "v2v_dist_min_m", "v2v_dist_max_m"};

constexpr std::string_view kRequiredKeys[] = {"m_cellular", "k_v2v",     "pmax_c",
                                              "pmax_v",     "noise_var", "channel_mode"};

constexpr std::string_view kOptionalKeys[] = {"weight_c", "weight_v", "feature_layout", "seed"};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw ConfigError(fmt::format("key '{}': '{}' is not a finite number", key, text));
    return value;
}

template <typename Int>
Int parse_integer(std::string_view key, std::string_view text) {
    text = trim(text);
    Int value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(fmt::format("key '{}': '{}' is not an integer", key, text));
    return value;
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_double(key, text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::vector<double> broadcast(std::string_view key, const std::vector<double>& values, int n) {
    if (values.size() == 1) return std::vector<double>(static_cast<std::size_t>(n), values[0]);
    if (values.size() != static_cast<std::size_t>(n))
        throw ConfigError(
            fmt::format("key '{}': expected 1 or {} values, got {}", key, n, values.size()));
    return values;
}

}  // namespace

std::string_view to_string(ChannelMode mode) {
    return mode == ChannelMode::Geometric ? "GEOMETRIC" : "IID_EXPONENTIAL";
}

std::string_view to_string(FeatureLayout layout) {
    return layout == FeatureLayout::PaperCompat ? "PAPER_COMPAT" : "FULL";
}

ChannelMode parse_channel_mode(std::string_view text) {
    text = trim(text);
    if (text == "IID_EXPONENTIAL") return ChannelMode::IidExponential;
    if (text == "GEOMETRIC") return ChannelMode::Geometric;
    throw ConfigError(fmt::format("unknown channel_mode '{}'", text));
}

FeatureLayout parse_feature_layout(std::string_view text) {
    text = trim(text);
    if (text == "FULL") return FeatureLayout::Full;
    if (text == "PAPER_COMPAT") return FeatureLayout::PaperCompat;
    throw ConfigError(fmt::format("unknown feature_layout '{}'", text));
}

SystemConfig SystemConfig::defaults() { return with_dims(8, 10); }

SystemConfig SystemConfig::with_dims(int m, int k) {
    SystemConfig cfg;
    cfg.m_cellular = m;
    cfg.k_v2v = k;
    cfg.weight_c.assign(static_cast<std::size_t>(std::max(m, 0)), 1.0);
    cfg.weight_v.assign(static_cast<std::size_t>(std::max(k, 0)), 1.0);
    return cfg;
}

void SystemConfig::validate() const {
    if (m_cellular < 0 || k_v2v < 0 || users() < 1)
        throw ConfigError(fmt::format(
            "need m_cellular >= 0, k_v2v >= 0 and at least one user (got M={}, K={})",
            m_cellular, k_v2v));
    if (!(pmax_c > 0.0) || !std::isfinite(pmax_c)) throw ConfigError("pmax_c must be > 0");
    if (!(pmax_v > 0.0) || !std::isfinite(pmax_v)) throw ConfigError("pmax_v must be > 0");
    if (!(noise_var > 0.0) || !std::isfinite(noise_var))
        throw ConfigError("noise_var must be > 0");
    if (weight_c.size() != static_cast<std::size_t>(m_cellular))
        throw ConfigError(fmt::format("weight_c has {} entries, expected M={}", weight_c.size(),
                                      m_cellular));
    if (weight_v.size() != static_cast<std::size_t>(k_v2v))
        throw ConfigError(
            fmt::format("weight_v has {} entries, expected K={}", weight_v.size(), k_v2v));
    auto bad = [](double w) { return !(w >= 0.0) || !std::isfinite(w); };
    if (std::any_of(weight_c.begin(), weight_c.end(), bad) ||
        std::any_of(weight_v.begin(), weight_v.end(), bad))
        throw ConfigError("all priority weights must be finite and >= 0");
    if ((channel_mode == ChannelMode::Geometric) != geo.has_value())
        throw ConfigError("geometric parameters must be present iff channel_mode = GEOMETRIC");
    if (geo) {
        const auto& g = *geo;
        if (!(g.pathloss_const > 0.0)) throw ConfigError("pathloss_const must be > 0");
        if (!(g.pathloss_exp > 0.0)) throw ConfigError("pathloss_exp must be > 0");
        if (!(g.shadow_sigma_db >= 0.0)) throw ConfigError("shadow_sigma_db must be >= 0");
        if (!(g.cell_radius_m > 0.0)) throw ConfigError("cell_radius_m must be > 0");
        if (!(g.v2v_dist_min_m > 0.0) || !(g.v2v_dist_max_m >= g.v2v_dist_min_m))
            throw ConfigError("need 0 < v2v_dist_min_m <= v2v_dist_max_m");
    }
}

SystemConfig parse_config(std::string_view text) {
    std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, fmt::format("expected 'key = value', got '{}'", line));
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        const bool known =
            std::find(std::begin(kRequiredKeys), std::end(kRequiredKeys), key) !=
                std::end(kRequiredKeys) ||
            std::find(std::begin(kOptionalKeys), std::end(kOptionalKeys), key) !=
                std::end(kOptionalKeys) ||
            std::find(std::begin(kGeoKeys), std::end(kGeoKeys), key) != std::end(kGeoKeys);
        if (!known) throw ParseError(line_no, fmt::format("unknown key '{}'", key));
        if (value.empty()) throw ParseError(line_no, fmt::format("key '{}' has no value", key));
        if (!entries.emplace(key, std::make_pair(value, line_no)).second)
            throw ParseError(line_no, fmt::format("duplicate key '{}'", key));
    }

    for (auto key : kRequiredKeys)
        if (!entries.contains(key))
            throw ConfigError(fmt::format("missing required key '{}'", key));

    auto get = [&](std::string_view key) -> const std::string& { return entries.find(key)->second.first; };

    SystemConfig cfg;
    cfg.m_cellular = parse_integer<int>("m_cellular", get("m_cellular"));
    cfg.k_v2v = parse_integer<int>("k_v2v", get("k_v2v"));
    cfg.pmax_c = parse_double("pmax_c", get("pmax_c"));
    cfg.pmax_v = parse_double("pmax_v", get("pmax_v"));
    cfg.noise_var = parse_double("noise_var", get("noise_var"));
    cfg.channel_mode = parse_channel_mode(get("channel_mode"));

    const int m = std::max(cfg.m_cellular, 0);
    const int k = std::max(cfg.k_v2v, 0);
    cfg.weight_c = entries.contains("weight_c")
                       ? broadcast("weight_c", parse_list("weight_c", get("weight_c")), m)
                       : std::vector<double>(static_cast<std::size_t>(m), 1.0);
    cfg.weight_v = entries.contains("weight_v")
                       ? broadcast("weight_v", parse_list("weight_v", get("weight_v")), k)
                       : std::vector<double>(static_cast<std::size_t>(k), 1.0);
    if (entries.contains("feature_layout"))
        cfg.feature_layout = parse_feature_layout(get("feature_layout"));
    if (entries.contains("seed")) cfg.seed = parse_integer<std::uint64_t>("seed", get("seed"));

    if (cfg.channel_mode == ChannelMode::Geometric) {
        GeometricParams g;
        auto read = [&](std::string_view key, double& field) {
            if (entries.contains(key)) field = parse_double(key, get(key));
        };
        read("pathloss_const", g.pathloss_const);
        read("pathloss_exp", g.pathloss_exp);
        read("shadow_sigma_db", g.shadow_sigma_db);
        read("cell_radius_m", g.cell_radius_m);
        read("v2v_dist_min_m", g.v2v_dist_min_m);
        read("v2v_dist_max_m", g.v2v_dist_max_m);
        cfg.geo = g;
    } else {
        for (auto key : kGeoKeys)
            if (const auto it = entries.find(key); it != entries.end())
                throw ParseError(it->second.second,
                                 fmt::format("key '{}' requires channel_mode = GEOMETRIC", key));
    }

    cfg.validate();
    return cfg;
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string format_config(const SystemConfig& cfg) {
    std::string out;
    auto line = [&](std::string_view key, const auto& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    line("m_cellular", cfg.m_cellular);
    line("k_v2v", cfg.k_v2v);
    line("pmax_c", cfg.pmax_c);
    line("pmax_v", cfg.pmax_v);
    line("noise_var", cfg.noise_var);
    if (!cfg.weight_c.empty()) line("weight_c", fmt::format("{}", fmt::join(cfg.weight_c, ",")));
    if (!cfg.weight_v.empty()) line("weight_v", fmt::format("{}", fmt::join(cfg.weight_v, ",")));
    line("channel_mode", to_string(cfg.channel_mode));
    if (cfg.geo) {
        line("pathloss_const", cfg.geo->pathloss_const);
        line("pathloss_exp", cfg.geo->pathloss_exp);
        line("shadow_sigma_db", cfg.geo->shadow_sigma_db);
        line("cell_radius_m", cfg.geo->cell_radius_m);
        line("v2v_dist_min_m", cfg.geo->v2v_dist_min_m);
        line("v2v_dist_max_m", cfg.geo->v2v_dist_max_m);
    }
    line("feature_layout", to_string(cfg.feature_layout));
    line("seed", cfg.seed);
    return out;
}

}  // namespace v2x
