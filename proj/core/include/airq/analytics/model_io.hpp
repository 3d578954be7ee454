#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "airq/analytics/plot_export.hpp"

namespace airq::analytics {

inline constexpr int kModelSchemaVersion = 1;

// A fitted model together with the data it was trained on, as stored on disk:
// {"schema":1,"model":"linreg|tree|svm","params":{...},"metrics":{...},
//  "samples":[...]}
struct ModelFile {
  AnyModel model;
  std::vector<Sample2D> samples;
  nlohmann::json metrics;
};

std::string model_kind(const AnyModel& model);

nlohmann::json to_json(const ModelFile& file);
ModelFile model_file_from_json(const nlohmann::json& j);

nlohmann::json tree_to_json(const TreeNode& node);
TreeNodePtr tree_from_json(const nlohmann::json& j);

// Training metrics reported alongside a fit.
nlohmann::json training_metrics(const AnyModel& model, std::span<const Sample2D> samples);

// Fraction of labeled samples predicted correctly.
double training_accuracy(const AnyModel& model, std::span<const Sample2D> samples);

}  // namespace airq::analytics
