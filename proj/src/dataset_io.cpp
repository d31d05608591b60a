#include <string>

#include <fmt/format.h>

#include "text_util.hpp"
#include "v2xalloc/error.hpp"
#include "v2xalloc/pipeline.hpp"

namespace v2x {

std::string format_dataset(const Dataset& data) {
    const int d = data.feature_width();
    const int users = static_cast<int>(data.targets.cols());
    std::string out = fmt::format("{},M={},K={},layout={},seed={}\n", kDataMagic,
                                  data.cfg.m_cellular, data.cfg.k_v2v,
                                  to_string(data.cfg.feature_layout), data.seed);
    for (int j = 0; j < d; ++j) out += fmt::format("f{},", j);
    for (int j = 0; j < users; ++j) out += fmt::format("p{},", j);
    out += "label_rate,converged\n";
    for (int i = 0; i < data.size(); ++i) {
        for (int j = 0; j < d; ++j) {
            out += detail::fmt17(data.features(i, j));
            out += ',';
        }
        for (int j = 0; j < users; ++j) {
            out += detail::fmt17(data.targets(i, j));
            out += ',';
        }
        out += detail::fmt17(data.label_rate(i));
        out += data.converged[static_cast<std::size_t>(i)] ? ",1\n" : ",0\n";
    }
    return out;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    detail::write_file(path, format_dataset(data));
}

namespace {

std::string_view header_field(std::string_view tok, std::string_view key, std::size_t line) {
    if (!tok.starts_with(key) || tok.size() <= key.size() || tok[key.size()] != '=')
        throw ParseError(line, fmt::format("expected '{}=<value>' in header, got '{}'", key, tok));
    return tok.substr(key.size() + 1);
}

}  // namespace

Dataset parse_dataset(std::string_view text, const std::optional<SystemConfig>& base) {
    detail::LineReader reader(text);
    const auto header = detail::split(reader.expect("dataset header"), ',');
    if (header[0] != kDataMagic) {
        if (header[0].starts_with("V2XALLOC-DATA"))
            throw ParseError(1, fmt::format("unsupported dataset version '{}', this build reads '{}'",
                                            header[0], kDataMagic));
        throw ParseError(1, "not a dataset file (missing 'V2XALLOC-DATA' header)");
    }
    if (header.size() != 5) throw ParseError(1, "header needs M=, K=, layout= and seed= fields");
    const int m = detail::to_int<int>(header_field(header[1], "M", 1), 1);
    const int k = detail::to_int<int>(header_field(header[2], "K", 1), 1);
    FeatureLayout layout;
    try {
        layout = parse_feature_layout(header_field(header[3], "layout", 1));
    } catch (const ConfigError& e) {
        throw ParseError(1, e.what());
    }
    const auto seed = detail::to_int<std::uint64_t>(header_field(header[4], "seed", 1), 1);

    Dataset data;
    if (base) {
        if (base->m_cellular != m || base->k_v2v != k)
            throw ConfigError(fmt::format("dataset has M={}, K={} but config has M={}, K={}", m, k,
                                          base->m_cellular, base->k_v2v));
        data.cfg = *base;
    } else {
        data.cfg = SystemConfig::with_dims(m, k);
    }
    data.cfg.feature_layout = layout;
    data.cfg.seed = seed;
    data.seed = seed;
    try {
        data.cfg.validate();
    } catch (const ConfigError& e) {
        throw ParseError(1, e.what());
    }

    const int d = feature_dim(m, k, layout);
    const int users = m + k;
    const std::size_t columns = static_cast<std::size_t>(d + users + 2);
    const auto names = detail::split(reader.expect("column header"), ',');
    if (names.size() != columns)
        throw ParseError(2, fmt::format("expected {} columns for M={}, K={}, layout={}, got {}",
                                        columns, m, k, to_string(layout), names.size()));

    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> converged;
    while (!reader.at_end()) {
        const std::string_view line = reader.expect("sample row");
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != columns)
            throw ParseError(reader.line(), fmt::format("expected {} fields, got {}", columns,
                                                        cells.size()));
        std::vector<double> row(columns - 1);
        for (std::size_t c = 0; c + 1 < columns; ++c)
            row[c] = detail::to_double(cells[c], reader.line());
        const auto flag = cells.back();
        if (flag != "0" && flag != "1")
            throw ParseError(reader.line(), fmt::format("converged flag must be 0 or 1, got '{}'", flag));
        converged.push_back(flag == "1" ? 1 : 0);
        rows.push_back(std::move(row));
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    data.features.resize(n, d);
    data.targets.resize(n, users);
    data.label_rate.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        for (int j = 0; j < d; ++j) data.features(i, j) = row[static_cast<std::size_t>(j)];
        for (int j = 0; j < users; ++j) data.targets(i, j) = row[static_cast<std::size_t>(d + j)];
        data.label_rate(i) = row[static_cast<std::size_t>(d + users)];
    }
    data.converged = std::move(converged);
    return data;
}

Dataset load_dataset(const std::filesystem::path& path, const std::optional<SystemConfig>& base) {
    return parse_dataset(detail::read_file(path), base);
}

}  // namespace v2x
