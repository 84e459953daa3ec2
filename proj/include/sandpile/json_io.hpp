#pragma once

#include "sandpile/exact.hpp"
#include "sandpile/model.hpp"
#include "sandpile/presets.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sandpile {

/// Parsed model file: the model plus its optional addition law.
struct ModelFile {
    SandpileModel model;
    std::optional<AdditionDistribution> mu;
};

/// Model file schema:
///   {"n_sites": N,
///    "topplings": [[{"delta": [int,...], "prob": "p/q"}, ...], ...],
///    "mu": ["p/q", ...]}            (mu optional)
/// topplings[v-1] lists site v's support; delta has length N. Parse and
/// validation errors name the site and entry at fault.
ModelFile model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const SandpileModel& model,
                             const std::optional<AdditionDistribution>& mu = std::nullopt);

ModelFile load_model_file(const std::string& path);

/// {"n_sites": N, "edges": [[int,...],...]} with diagonal = sink edges.
MultigraphSpec multigraph_from_json(const nlohmann::json& j);

/// Comma-separated grain counts, e.g. "3,1".
Config parse_config(const std::string& text);

nlohmann::json rational_vector_to_json(const std::vector<Rational>& v, bool as_float = false);
nlohmann::json matrix_to_json(const RationalMatrix& m, bool as_float = false);

} // namespace sandpile
