#include <string>

#include <fmt/format.h>

#include "text_util.hpp"
#include "v2xalloc/error.hpp"
#include "v2xalloc/neural_net.hpp"

namespace v2x {

std::string format_model(const Network& net) {
    std::string out = kModelMagic;
    out += '\n';
    const auto& sizes = net.spec().sizes;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(sizes[i]);
    }
    out += '\n';
    for (Eigen::Index j = 0; j < net.pmax_out().size(); ++j) {
        if (j) out += ' ';
        out += detail::fmt17(net.pmax_out()(j));
    }
    out += '\n';
    for (const auto& w : net.weights()) {
        bool first = true;
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                if (!first) out += ' ';
                first = false;
                out += detail::fmt17(w(r, c));
            }
        out += '\n';
    }
    return out;
}

Network parse_model(std::string_view text) {
    detail::LineReader reader(text);
    const std::string_view magic = reader.expect("model header");
    if (magic != kModelMagic) {
        if (magic.starts_with("V2XALLOC-MODEL"))
            throw ParseError(1, fmt::format("unsupported model version '{}', this build reads '{}'",
                                            magic, kModelMagic));
        throw ParseError(1, "not a model file (missing 'V2XALLOC-MODEL' header)");
    }

    LayerSpec spec;
    for (auto tok : detail::split_ws(reader.expect("layer sizes")))
        spec.sizes.push_back(detail::to_int<int>(tok, reader.line()));
    try {
        spec.validate();
    } catch (const ShapeError& e) {
        throw ParseError(reader.line(), e.what());
    }

    const auto ceil_tokens = detail::split_ws(reader.expect("clamp ceilings"));
    if (static_cast<int>(ceil_tokens.size()) != spec.n_out())
        throw ParseError(reader.line(), fmt::format("expected {} clamp ceilings, got {}",
                                                    spec.n_out(), ceil_tokens.size()));
    Eigen::VectorXd pmax(spec.n_out());
    for (int j = 0; j < spec.n_out(); ++j)
        pmax(j) = detail::to_double(ceil_tokens[static_cast<std::size_t>(j)], reader.line());

    Network net(spec, pmax);
    auto& weights = net.mutable_weights();
    for (std::size_t l = 0; l < weights.size(); ++l) {
        auto& w = weights[l];
        const auto tokens = detail::split_ws(reader.expect(fmt::format("weights of layer {}", l)));
        if (static_cast<Eigen::Index>(tokens.size()) != w.size())
            throw ParseError(reader.line(), fmt::format("layer {} needs {} weights, got {}", l,
                                                        w.size(), tokens.size()));
        std::size_t t = 0;
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = detail::to_double(tokens[t++], reader.line());
    }
    while (!reader.at_end())
        if (!reader.expect("").empty())
            throw ParseError(reader.line(), "trailing content after last weight layer");
    return net;
}

void save_model(const Network& net, const std::filesystem::path& path) {
    detail::write_file(path, format_model(net));
}

Network load_model(const std::filesystem::path& path) {
    return parse_model(detail::read_file(path));
}

}  // namespace v2x
