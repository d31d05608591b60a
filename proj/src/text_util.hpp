#pragma once

// Line-oriented parsing helpers shared by the model and dataset readers.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "v2xalloc/error.hpp"

namespace v2x::detail {

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(fmt::format("cannot open '{}' for reading", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

/// Iterates '\n'-terminated lines and tracks 1-based line numbers.
class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    /// Next line, or throws ParseError naming the missing line.
    std::string_view expect(std::string_view what) {
        if (pos_ >= text_.size())
            throw ParseError(line_ + 1, fmt::format("unexpected end of file, expected {}", what));
        const auto nl = text_.find('\n', pos_);
        std::string_view line = text_.substr(pos_, nl == std::string_view::npos ? nl : nl - pos_);
        pos_ = nl == std::string_view::npos ? text_.size() : nl + 1;
        ++line_;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    }

    bool at_end() const { return pos_ >= text_.size(); }
    std::size_t line() const { return line_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
};

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto at = s.find(sep, start);
        out.push_back(s.substr(start, at == std::string_view::npos ? at : at - start));
        if (at == std::string_view::npos) break;
        start = at + 1;
    }
    return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

inline double to_double(std::string_view tok, std::size_t line) {
    double value = 0.0;
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, value);
    if (ec == std::errc::result_out_of_range) {
        // from_chars reports subnormal results as out of range; strtod handles them
        value = std::strtod(std::string(tok).c_str(), nullptr);
    } else if (ec != std::errc{} || ptr != end) {
        throw ParseError(line, fmt::format("'{}' is not a number", tok));
    }
    return value;
}

template <typename Int>
Int to_int(std::string_view tok, std::size_t line) {
    Int value{};
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(line, fmt::format("'{}' is not an integer", tok));
    return value;
}

inline std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

}  // namespace v2x::detail
