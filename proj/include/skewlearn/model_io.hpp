#pragma once

#include <string>

#include <json.hpp>

#include "skewlearn/learners.hpp"

namespace skewlearn {

/// Lossless JSON round trip for every family (doubles keep their exact
/// values via shortest round-trip formatting).
nlohmann::ordered_json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

nlohmann::ordered_json params_to_json(const ParamMap& params);
ParamMap params_from_json(const nlohmann::json& j);

} // namespace skewlearn
