#pragma once

#include <string>

#include <json.hpp>

#include "gesture_forge/gan.hpp"
#include "gesture_forge/predictor.hpp"
#include "gesture_forge/recognizer.hpp"

namespace gesture_forge {

using Json = nlohmann::ordered_json;

/// Matrices are {"rows", "cols", "data"} with data in row-major order.
Json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& name);

/// Weight documents. Readers validate every shape and throw ParseError.
Json gan_to_json(const GanModel& model);
GanModel gan_from_json(const Json& j);

Json predictor_to_json(const PredictorModel& model);
PredictorModel predictor_from_json(const Json& j);

/// {gesture, relative_error, strategy, cursor, table: [{gesture, re_coord, re_angle}]};
/// a template that never won a cursor in a map has null there.
Json match_result_to_json(const MatchResult& result);

/// Throw IoError when the file cannot be opened, ParseError on bad JSON.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace gesture_forge
