#include "sandpile/json_io.hpp"

#include <fstream>
#include <sstream>

namespace sandpile {

using nlohmann::json;

ModelFile model_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n_sites") || !j.contains("topplings")) {
        throw ParseError("model file must be an object with n_sites and topplings");
    }
    int n = j.at("n_sites").get<int>();
    const auto& tops = j.at("topplings");
    if (!tops.is_array() || tops.size() != static_cast<std::size_t>(n)) {
        throw ParseError("topplings must list one support array per site");
    }

    std::vector<TopplingDistribution> topplings(static_cast<std::size_t>(n));
    for (int v = 1; v <= n; ++v) {
        const auto& support = tops.at(static_cast<std::size_t>(v - 1));
        if (!support.is_array()) {
            throw ParseError("site " + std::to_string(v) + ": support must be an array");
        }
        auto& dist = topplings[static_cast<std::size_t>(v - 1)];
        dist.site = v;
        int entry = 0;
        for (const auto& card : support) {
            ++entry;
            const std::string tag = "site " + std::to_string(v) + ", support entry " +
                                    std::to_string(entry);
            if (!card.is_object() || !card.contains("delta") || !card.contains("prob")) {
                throw ParseError(tag + ": each card needs delta and prob");
            }
            TopplingVector vec;
            vec.site = v;
            vec.delta = card.at("delta").get<std::vector<std::int64_t>>();
            Rational prob = parse_rational(card.at("prob").get<std::string>());
            dist.support.emplace_back(std::move(vec), std::move(prob));
        }
    }

    ModelFile file;
    file.model = validate_model(n, std::move(topplings));
    if (j.contains("mu")) {
        std::vector<Rational> weights;
        for (const auto& w : j.at("mu")) {
            weights.push_back(parse_rational(w.get<std::string>()));
        }
        file.mu = validate_mu(n, std::move(weights));
    }
    return file;
}

json model_to_json(const SandpileModel& model, const std::optional<AdditionDistribution>& mu) {
    json tops = json::array();
    for (const auto& dist : model.topplings) {
        json support = json::array();
        for (const auto& [vec, prob] : dist.support) {
            support.push_back({{"delta", vec.delta}, {"prob", format_rational(prob)}});
        }
        tops.push_back(std::move(support));
    }
    json j{{"n_sites", model.n_sites}, {"topplings", std::move(tops)}};
    if (mu) {
        json weights = json::array();
        for (const auto& w : mu->weights) {
            weights.push_back(format_rational(w));
        }
        j["mu"] = std::move(weights);
    }
    return j;
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open model file '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("invalid JSON in '" + path + "': " + e.what());
    }
    return model_from_json(j);
}

MultigraphSpec multigraph_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n_sites") || !j.contains("edges")) {
        throw ParseError("multigraph file must be an object with n_sites and edges");
    }
    MultigraphSpec spec;
    spec.n_sites = j.at("n_sites").get<int>();
    spec.edges = j.at("edges").get<std::vector<std::vector<std::int64_t>>>();
    return spec;
}

Config parse_config(const std::string& text) {
    Config eta;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            eta.push_back(std::stoll(token));
        } catch (const std::exception&) {
            throw ParseError("malformed grain count '" + token + "'");
        }
    }
    if (eta.empty() && !text.empty()) {
        throw ParseError("malformed configuration '" + text + "'");
    }
    return eta;
}

json rational_vector_to_json(const std::vector<Rational>& v, bool as_float) {
    json out = json::array();
    for (const auto& r : v) {
        if (as_float) {
            out.push_back(to_double(r));
        } else {
            out.push_back(format_rational(r));
        }
    }
    return out;
}

json matrix_to_json(const RationalMatrix& m, bool as_float) {
    json out = json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols; ++j) {
            if (as_float) {
                row.push_back(to_double(m(i, j)));
            } else {
                row.push_back(format_rational(m(i, j)));
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

} // namespace sandpile
