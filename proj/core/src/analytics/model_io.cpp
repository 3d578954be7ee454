#include "airq/analytics/model_io.hpp"

#include <nlohmann/json.hpp>

#include "airq/error.hpp"

namespace airq::analytics {
namespace {

using nlohmann::json;

[[noreturn]] void bad_model(const std::string& what) {
  fail(ErrorCode::kParse, "model file: " + what);
}

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad_model(std::string("missing '") + key + "'");
  return j.at(key);
}

json sample_json(const Sample2D& s) {
  json j = {{"x", s.x}, {"y", s.y}};
  j["label"] = s.label ? json(salubrity::to_string(*s.label)) : json(nullptr);
  return j;
}

Sample2D sample_from_json(const json& j) {
  Sample2D s{need(j, "x").get<double>(), need(j, "y").get<double>(), std::nullopt};
  if (j.contains("label") && !j["label"].is_null())
    s.label = salubrity::label_from_string(j["label"].get<std::string>());
  return s;
}

}  // namespace

std::string model_kind(const AnyModel& model) {
  switch (model.index()) {
    case 0: return "linreg";
    case 1: return "tree";
    default: return "svm";
  }
}

json tree_to_json(const TreeNode& node) {
  json j;
  j["counts"] = {{"safe", node.counts.safe}, {"unsafe", node.counts.unsafe}};
  if (node.is_leaf()) {
    j["leaf"] = {{"label", salubrity::to_string(node.leaf().label)},
                 {"sample_count", node.leaf().sample_count}};
  } else {
    const auto& s = node.split();
    j["split"] = {{"feature_index", s.feature_index},
                  {"threshold", s.threshold},
                  {"left", tree_to_json(*s.left)},
                  {"right", tree_to_json(*s.right)}};
  }
  return j;
}

TreeNodePtr tree_from_json(const json& j) {
  auto node = std::make_shared<TreeNode>();
  const auto& counts = need(j, "counts");
  node->counts = {need(counts, "safe").get<std::size_t>(), need(counts, "unsafe").get<std::size_t>()};
  if (j.contains("leaf")) {
    const auto& l = j["leaf"];
    node->kind = TreeLeaf{salubrity::label_from_string(need(l, "label").get<std::string>()),
                          need(l, "sample_count").get<std::size_t>()};
  } else {
    const auto& s = need(j, "split");
    const int feature = need(s, "feature_index").get<int>();
    if (feature != 0 && feature != 1) bad_model("feature_index must be 0 or 1");
    node->kind = TreeSplit{feature, need(s, "threshold").get<double>(),
                           tree_from_json(need(s, "left")), tree_from_json(need(s, "right"))};
  }
  return node;
}

double training_accuracy(const AnyModel& model, std::span<const Sample2D> samples) {
  std::size_t labeled = 0;
  std::size_t correct = 0;
  for (const auto& s : samples) {
    if (!s.label) continue;
    ++labeled;
    Label got;
    if (const auto* tree = std::get_if<TreeNodePtr>(&model))
      got = predict(**tree, s);
    else if (const auto* svm = std::get_if<SvmModel>(&model))
      got = predict(*svm, s);
    else
      return 0.0;
    if (got == *s.label) ++correct;
  }
  return labeled ? static_cast<double>(correct) / static_cast<double>(labeled) : 0.0;
}

json training_metrics(const AnyModel& model, std::span<const Sample2D> samples) {
  json m;
  m["n"] = samples.size();
  if (const auto* reg = std::get_if<RegressionModel>(&model)) {
    m["r_squared"] = reg->r_squared ? json(*reg->r_squared) : json(nullptr);
    m["r_squared_defined"] = reg->r_squared.has_value();
  } else if (const auto* tree = std::get_if<TreeNodePtr>(&model)) {
    m["training_accuracy"] = training_accuracy(model, samples);
    m["depth"] = tree_depth(**tree);
    m["leaves"] = leaf_count(**tree);
  } else {
    const auto& svm = std::get<SvmModel>(model);
    std::size_t sv = 0;
    for (double a : svm.alphas) sv += a > 0 ? 1 : 0;
    m["training_accuracy"] = training_accuracy(model, samples);
    m["converged"] = svm.converged;
    m["iterations"] = svm.iterations;
    m["support_vectors"] = sv;
    m["max_kkt_violation"] = max_kkt_violation(svm, samples);
  }
  return m;
}

json to_json(const ModelFile& file) {
  json j;
  j["schema"] = kModelSchemaVersion;
  j["model"] = model_kind(file.model);
  if (const auto* reg = std::get_if<RegressionModel>(&file.model)) {
    j["params"] = {{"slope", reg->slope}, {"intercept", reg->intercept},
                   {"r_squared", reg->r_squared ? json(*reg->r_squared) : json(nullptr)}};
  } else if (const auto* tree = std::get_if<TreeNodePtr>(&file.model)) {
    j["params"] = {{"tree", tree_to_json(**tree)}};
  } else {
    const auto& svm = std::get<SvmModel>(file.model);
    j["params"] = {{"w", svm.w},           {"b", svm.b},
                   {"alphas", svm.alphas}, {"c", svm.c},
                   {"tol", svm.tol},       {"converged", svm.converged},
                   {"iterations", svm.iterations}};
  }
  j["metrics"] = file.metrics.is_null() ? json::object() : file.metrics;
  auto& samples = j["samples"] = json::array();
  for (const auto& s : file.samples) samples.push_back(sample_json(s));
  return j;
}

ModelFile model_file_from_json(const json& j) {
  try {
    if (need(j, "schema").get<int>() != kModelSchemaVersion)
      bad_model("unsupported schema version " + j["schema"].dump());
    const auto kind = need(j, "model").get<std::string>();
    const auto& p = need(j, "params");
    ModelFile f;
    if (kind == "linreg") {
      RegressionModel m;
      m.slope = need(p, "slope").get<double>();
      m.intercept = need(p, "intercept").get<double>();
      if (p.contains("r_squared") && !p["r_squared"].is_null()) m.r_squared = p["r_squared"].get<double>();
      f.model = m;
    } else if (kind == "tree") {
      f.model = tree_from_json(need(p, "tree"));
    } else if (kind == "svm") {
      SvmModel m;
      m.w = need(p, "w").get<std::array<double, 2>>();
      m.b = need(p, "b").get<double>();
      m.alphas = need(p, "alphas").get<std::vector<double>>();
      m.c = need(p, "c").get<double>();
      m.tol = p.value("tol", 1e-3);
      m.converged = p.value("converged", false);
      m.iterations = p.value("iterations", 0);
      f.model = m;
    } else {
      bad_model("unknown model kind '" + kind + "'");
    }
    if (j.contains("samples"))
      for (const auto& s : j["samples"]) f.samples.push_back(sample_from_json(s));
    if (auto* reg = std::get_if<RegressionModel>(&f.model)) reg->n = f.samples.size();
    f.metrics = j.value("metrics", json::object());
    return f;
  } catch (const json::exception& e) {
    bad_model(e.what());
  }
}

}  // namespace airq::analytics
