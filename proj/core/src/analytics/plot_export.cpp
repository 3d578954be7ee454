#include "airq/analytics/plot_export.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "airq/error.hpp"
#include "airq/format.hpp"

namespace airq::analytics {
namespace {

std::vector<double> axis(double lo, double hi, std::size_t steps) {
  std::vector<double> a(steps);
  for (std::size_t i = 0; i < steps; ++i)
    a[i] = lo + (hi - lo) * (static_cast<double>(i) / static_cast<double>(steps - 1));
  a.back() = hi;
  return a;
}

template <class Predict>
RegionGrid region_grid(const GridBounds& b, Predict&& predict_label) {
  RegionGrid g;
  g.t_axis = axis(b.t_min, b.t_max, b.steps);
  g.h_axis = axis(b.h_min, b.h_max, b.steps);
  g.labels.reserve(b.steps * b.steps);
  for (double t : g.t_axis)
    for (double h : g.h_axis) g.labels.push_back(predict_label(Sample2D{t, h, std::nullopt}));
  return g;
}

// Segment of w0*x + w1*y + b = 0 inside the bounds rectangle; empty when the
// line misses the rectangle or w is zero.
std::vector<std::array<double, 2>> clip_line(const SvmModel& m, const GridBounds& bd) {
  const double w0 = m.w[0];
  const double w1 = m.w[1];
  std::vector<std::array<double, 2>> hits;
  auto add = [&](double x, double y) {
    constexpr double kEps = 1e-12;
    if (x < bd.t_min - kEps || x > bd.t_max + kEps || y < bd.h_min - kEps || y > bd.h_max + kEps)
      return;
    x = std::clamp(x, bd.t_min, bd.t_max);
    y = std::clamp(y, bd.h_min, bd.h_max);
    for (const auto& p : hits)
      if (std::abs(p[0] - x) < 1e-9 && std::abs(p[1] - y) < 1e-9) return;
    hits.push_back({x, y});
  };
  if (w1 != 0.0) {
    add(bd.t_min, -(w0 * bd.t_min + m.b) / w1);
    add(bd.t_max, -(w0 * bd.t_max + m.b) / w1);
  }
  if (w0 != 0.0) {
    add(-(w1 * bd.h_min + m.b) / w0, bd.h_min);
    add(-(w1 * bd.h_max + m.b) / w0, bd.h_max);
  }
  if (hits.size() < 2) return {};
  // Keep the two most distant intersections (corner hits can yield 3-4 points).
  std::size_t bi = 0;
  std::size_t bj = 1;
  double best = -1.0;
  for (std::size_t i = 0; i < hits.size(); ++i)
    for (std::size_t j = i + 1; j < hits.size(); ++j) {
      const double d = std::hypot(hits[i][0] - hits[j][0], hits[i][1] - hits[j][1]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  auto a = hits[bi];
  auto b = hits[bj];
  if (b < a) std::swap(a, b);
  return {a, b};
}

void validate(const GridBounds& b) {
  if (!(b.t_min < b.t_max) || !(b.h_min < b.h_max))
    fail(ErrorCode::kInvalidParameter, "plot bounds must be non-empty ranges", {"bounds"});
  if (b.steps < 2) fail(ErrorCode::kInvalidParameter, "plot grid steps must be >= 2", {"steps"});
}

nlohmann::json label_json(const std::optional<Label>& l) {
  return l ? nlohmann::json(salubrity::to_string(*l)) : nlohmann::json(nullptr);
}

}  // namespace

GridBounds bounds_from_samples(std::span<const Sample2D> samples, std::size_t steps) {
  GridBounds b;
  b.steps = steps;
  if (samples.empty()) return b;
  auto [xmin, xmax] = std::minmax_element(samples.begin(), samples.end(),
                                          [](auto& a, auto& c) { return a.x < c.x; });
  auto [ymin, ymax] = std::minmax_element(samples.begin(), samples.end(),
                                          [](auto& a, auto& c) { return a.y < c.y; });
  auto pad = [](double lo, double hi) { return hi > lo ? 0.05 * (hi - lo) : 1.0; };
  const double px = pad(xmin->x, xmax->x);
  const double py = pad(ymin->y, ymax->y);
  b.t_min = xmin->x - px;
  b.t_max = xmax->x + px;
  b.h_min = ymin->y - py;
  b.h_max = ymax->y + py;
  return b;
}

PlotDataset export_model_plot_data(const AnyModel& model, std::span<const Sample2D> samples,
                                   const GridBounds& bounds) {
  validate(bounds);
  PlotDataset out;
  out.bounds = bounds;
  out.scatter.reserve(samples.size());
  for (const auto& s : samples) out.scatter.push_back({s.x, s.y, s.label});

  if (const auto* reg = std::get_if<RegressionModel>(&model)) {
    out.model_kind = "linreg";
    out.line = {{bounds.t_min, predict(*reg, bounds.t_min)},
                {bounds.t_max, predict(*reg, bounds.t_max)}};
  } else if (const auto* tree = std::get_if<TreeNodePtr>(&model)) {
    if (!*tree) fail(ErrorCode::kInvalidParameter, "tree model is empty");
    out.model_kind = "tree";
    out.regions = region_grid(bounds, [&](const Sample2D& p) { return predict(**tree, p); });
  } else {
    const auto& svm = std::get<SvmModel>(model);
    out.model_kind = "svm";
    out.boundary = clip_line(svm, bounds);
    out.regions = region_grid(bounds, [&](const Sample2D& p) { return predict(svm, p); });
  }
  return out;
}

nlohmann::json to_json(const PlotDataset& data) {
  nlohmann::json j;
  j["schema"] = 1;
  j["model"] = data.model_kind;
  j["bounds"] = {{"t_min", data.bounds.t_min}, {"t_max", data.bounds.t_max},
                 {"h_min", data.bounds.h_min}, {"h_max", data.bounds.h_max},
                 {"steps", data.bounds.steps}};
  auto& scatter = j["scatter"] = nlohmann::json::array();
  for (const auto& p : data.scatter)
    scatter.push_back({{"x", p.x}, {"y", p.y}, {"label", label_json(p.label)}});
  j["line"] = data.line;
  j["boundary"] = data.boundary;
  if (data.regions) {
    nlohmann::json rows = nlohmann::json::array();
    const auto& g = *data.regions;
    for (std::size_t i = 0; i < g.t_axis.size(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t k = 0; k < g.h_axis.size(); ++k)
        row.push_back(salubrity::to_string(g.labels[i * g.h_axis.size() + k]));
      rows.push_back(std::move(row));
    }
    j["regions"] = {{"t_axis", g.t_axis}, {"h_axis", g.h_axis}, {"labels", std::move(rows)}};
  } else {
    j["regions"] = nullptr;
  }
  return j;
}

std::string to_csv(const PlotDataset& data) {
  std::string out = csv_record({"series", "x", "y", "value"});
  for (const auto& p : data.scatter)
    out += csv_record({"scatter", format_double(p.x), format_double(p.y),
                       p.label ? salubrity::to_string(*p.label) : ""});
  for (const auto& p : data.line)
    out += csv_record({"line", format_double(p[0]), format_double(p[1]), ""});
  for (const auto& p : data.boundary)
    out += csv_record({"boundary", format_double(p[0]), format_double(p[1]), ""});
  if (data.regions) {
    const auto& g = *data.regions;
    for (std::size_t i = 0; i < g.t_axis.size(); ++i)
      for (std::size_t k = 0; k < g.h_axis.size(); ++k)
        out += csv_record({"region", format_double(g.t_axis[i]), format_double(g.h_axis[k]),
                           salubrity::to_string(g.labels[i * g.h_axis.size() + k])});
  }
  return out;
}

}  // namespace airq::analytics
