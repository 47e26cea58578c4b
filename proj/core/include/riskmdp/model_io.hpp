#pragma once

#include "riskmdp/embedded.hpp"
#include "riskmdp/ext_real.hpp"
#include "riskmdp/model.hpp"
#include "riskmdp/simulate.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace riskmdp {

/// Base of every model-file error. The subclass says which stage failed.
class ModelLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not well-formed JSON (message carries line and column), or unreadable file.
class ParseError : public ModelLoadError {
public:
    using ModelLoadError::ModelLoadError;
};

/// Well-formed JSON that does not match the model schema (message carries the field path).
class SchemaError : public ModelLoadError {
public:
    using ModelLoadError::ModelLoadError;
};

/// Schema-valid model that breaks a model invariant.
class InvariantError : public ModelLoadError {
public:
    InvariantError(std::vector<Violation> violations);
    [[nodiscard]] const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/**
 * Model file schema (UTF-8 JSON):
 *
 *     {"kind": "homogeneous" | "time-varying" | "finite-horizon" | "discounted",
 *      "name": ..., "description": ...,
 *      "states": [labels], "actions": [labels],
 *      "rates": {x: {a: {y: entry}}},      omitted entries are 0
 *      "costs": {x: {a: entry}},
 *      "alpha": number, "T": number, "terminal_g": {x: number}}
 *
 * An entry is a number or {"time_pieces": [{"until": t, "coeffs": [...], "decay": l}, ...]}
 * where coefficients are in powers of (t - piece start), the optional decay
 * multiplies the piece by exp(-l (t - piece start)), and the last piece has no
 * "until" and extends to infinity. A piece may use "terms": [{"coeffs", "decay"}, ...]
 * for a sum of such terms.
 */
[[nodiscard]] ModelDoc parse_model(std::string_view text);
[[nodiscard]] ModelDoc model_from_json(const nlohmann::json& j);
[[nodiscard]] ModelDoc load_model(const std::filesystem::path& path);

[[nodiscard]] nlohmann::json model_to_json(const ModelDoc& doc);
void save_model(const ModelDoc& doc, const std::filesystem::path& path);

/// FNV-1a 64 of the canonical JSON rendering, as 16 hex digits.
[[nodiscard]] std::string model_digest(const ModelDoc& doc);

[[nodiscard]] nlohmann::json time_function_to_json(const TimeFunction& f);
[[nodiscard]] TimeFunction time_function_from_json(const nlohmann::json& j, const std::string& path);

/// {"kind": "stationary", "actions": {x: a}} or {"kind": "markov", "times": [...], "actions": {x: [a...]}}.
[[nodiscard]] nlohmann::json policy_to_json(const Policy& policy, const std::vector<std::string>& states,
                                            const std::vector<std::string>& actions);
/// Accepts a policy object, or any object holding one under "policy" (e.g. a solve report).
[[nodiscard]] Policy policy_from_json(const nlohmann::json& j, const std::vector<std::string>& states,
                                      const std::vector<std::string>& actions);

/// {x: number | "inf"}
[[nodiscard]] nlohmann::json values_to_json(const ValueTable& v, const std::vector<std::string>& states);
/// Accepts the map itself or an object holding it under "values".
[[nodiscard]] ValueTable values_from_json(const nlohmann::json& j, const std::vector<std::string>& states);

[[nodiscard]] nlohmann::json read_json_file(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ExtReal& x);
void from_json(const nlohmann::json& j, ExtReal& x);

}  // namespace riskmdp
