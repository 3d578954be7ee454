#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "airq/analytics/decision_tree.hpp"
#include "airq/analytics/regression.hpp"
#include "airq/analytics/svm.hpp"

namespace airq::analytics {

struct GridBounds {
  double t_min = 10.0;
  double t_max = 35.0;
  double h_min = 20.0;
  double h_max = 90.0;
  std::size_t steps = 10;  // per axis, >= 2
};

// Bounds spanning the samples' extent, padded by 5% of each range (or 1 unit
// when the range is degenerate).
GridBounds bounds_from_samples(std::span<const Sample2D> samples, std::size_t steps = 10);

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::optional<Label> label;
};

struct RegionGrid {
  std::vector<double> t_axis;
  std::vector<double> h_axis;
  std::vector<Label> labels;  // row-major over (t_axis, h_axis)
};

// Underlying data of a temperature-vs-humidity model figure.
struct PlotDataset {
  std::string model_kind;  // "linreg" | "tree" | "svm"
  GridBounds bounds;
  std::vector<ScatterPoint> scatter;
  std::vector<std::array<double, 2>> line;      // regression fit endpoints
  std::vector<std::array<double, 2>> boundary;  // SVM w.x + b = 0 clipped to bounds
  std::optional<RegionGrid> regions;            // tree / SVM class regions
};

using AnyModel = std::variant<RegressionModel, TreeNodePtr, SvmModel>;

PlotDataset export_model_plot_data(const AnyModel& model, std::span<const Sample2D> samples,
                                   const GridBounds& bounds);

// {"schema":1,"model":...,"bounds":{...},"scatter":[...],"line":[...],...}
nlohmann::json to_json(const PlotDataset& data);

// Columns: series,x,y,value. series is one of scatter|line|boundary|region;
// value is the label (scatter/region) or empty.
std::string to_csv(const PlotDataset& data);

}  // namespace airq::analytics
