#pragma once

#include <string>

#include "json.hpp"

#include "crossplit/model.hpp"

namespace crossplit {

using Json = nlohmann::ordered_json;

/// Potential profiles in JSON:
///   {"const": c}
///   {"family": "shifted_harmonic", "center": c, "curvature": w, "offset": d}
///     (the short keys "c", "w", "d" are accepted too)
///   {"family": "polynomial", "coeffs": [a0, a1, ...]}
///   {"family": "mirror", "of": <profile> | "v1" | "v2"}
PotentialSpec potential_from_json(const Json& j, const PotentialSpec* v1 = nullptr,
                                  const PotentialSpec* v2 = nullptr);
Json potential_to_json(const PotentialSpec& p);

/// {"v1": .., "v2": .., "coupling": {"r0": .., "r1": ..},
///  "window": {"lo": E1, "hi": E2}, "symmetric": bool}
/// Top-level "r0" / "r1" keys are accepted in place of "coupling", and the
/// window may be given as [E1, E2].
/// Throws InvalidArgument on malformed input (model checks still apply).
CrossingModel model_from_json(const Json& j);
Json model_to_json(const CrossingModel& m);

Json read_json_file(const std::string& path);
CrossingModel load_model(const std::string& path);

/// "%.17g"; non-finite values become "null" (JSON) or "nan"/"inf" (CSV).
std::string format_double(double v);
std::string csv_double(double v);

/// Serializes with every floating-point number at 17 significant digits.
std::string dump_json(const Json& j, int indent = 2);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace crossplit
