#include "airq/salubrity.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "airq/error.hpp"
#include "airq/format.hpp"

namespace airq::salubrity {
namespace {

void require_finite(double v, const char* field) {
  if (!std::isfinite(v))
    fail(ErrorCode::kInvalidParameter, std::string(field) + " must be finite", {field});
}

std::vector<double> linspace(double lo, double hi, std::size_t steps) {
  std::vector<double> axis(steps);
  const double span = hi - lo;
  const double denom = static_cast<double>(steps - 1);
  for (std::size_t i = 0; i < steps; ++i) axis[i] = lo + span * (static_cast<double>(i) / denom);
  axis.back() = hi;
  return axis;
}

}  // namespace

void SalubrityConfig::validate() const {
  require_finite(mu_t, "mu_t");
  require_finite(mu_h, "mu_h");
  require_finite(sigma_t, "sigma_t");
  require_finite(sigma_h, "sigma_h");
  require_finite(scale, "scale");
  if (!(sigma_t > 0)) fail(ErrorCode::kInvalidParameter, "sigma_t must be > 0", {"sigma_t"});
  if (!(sigma_h > 0)) fail(ErrorCode::kInvalidParameter, "sigma_h must be > 0", {"sigma_h"});
  if (!(scale > 0)) fail(ErrorCode::kInvalidParameter, "scale must be > 0", {"scale"});
}

const char* to_string(Label label) { return label == Label::kSafe ? "SAFE" : "UNSAFE"; }

Label label_from_string(const std::string& text) {
  if (text == "SAFE" || text == "safe" || text == "S" || text == "1" || text == "+1")
    return Label::kSafe;
  if (text == "UNSAFE" || text == "unsafe" || text == "U" || text == "-1" || text == "0")
    return Label::kUnsafe;
  fail(ErrorCode::kParse, "unknown label '" + text + "' (expected SAFE or UNSAFE)", {"label"});
}

double gaussian_factor(double x, double mu, double sigma) {
  require_finite(x, "x");
  require_finite(mu, "mu");
  if (!std::isfinite(sigma) || !(sigma > 0))
    fail(ErrorCode::kInvalidParameter, "sigma must be finite and > 0", {"sigma"});
  const double d = x - mu;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

SalubrityScore salubrity(double temp_c, double hum_pct, const SalubrityConfig& cfg) {
  cfg.validate();
  SalubrityScore s;
  s.temp_factor = gaussian_factor(temp_c, cfg.mu_t, cfg.sigma_t);
  s.hum_factor = gaussian_factor(hum_pct, cfg.mu_h, cfg.sigma_h);
  s.value = cfg.scale * s.temp_factor * s.hum_factor;
  return s;
}

SurfaceGrid surface_grid(const SalubrityConfig& cfg, double t_min, double t_max, double h_min,
                         double h_max, std::size_t steps) {
  cfg.validate();
  for (auto [v, name] : {std::pair{t_min, "t_min"}, std::pair{t_max, "t_max"},
                         std::pair{h_min, "h_min"}, std::pair{h_max, "h_max"}})
    require_finite(v, name);
  if (!(t_min < t_max))
    fail(ErrorCode::kInvalidParameter, "temperature range is empty or inverted", {"t_min", "t_max"});
  if (!(h_min < h_max))
    fail(ErrorCode::kInvalidParameter, "humidity range is empty or inverted", {"h_min", "h_max"});
  if (steps < 2) fail(ErrorCode::kInvalidParameter, "steps must be >= 2", {"steps"});

  SurfaceGrid grid;
  grid.t_axis = linspace(t_min, t_max, steps);
  grid.h_axis = linspace(h_min, h_max, steps);
  grid.values.reserve(steps * steps);
  for (double t : grid.t_axis)
    for (double h : grid.h_axis) grid.values.push_back(salubrity(t, h, cfg).value);
  return grid;
}

Label classify_salubrity(const SalubrityScore& score, double threshold) {
  return score.value >= threshold ? Label::kSafe : Label::kUnsafe;
}

nlohmann::json to_json(const SurfaceGrid& grid) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < grid.t_axis.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < grid.h_axis.size(); ++j) row.push_back(grid.at(i, j));
    rows.push_back(std::move(row));
  }
  return {{"t_axis", grid.t_axis}, {"h_axis", grid.h_axis}, {"values", std::move(rows)}};
}

std::string to_csv(const SurfaceGrid& grid) {
  std::vector<std::string> header{"t\\h"};
  for (double h : grid.h_axis) header.push_back(format_double(h));
  std::string out = csv_record(header);
  for (std::size_t i = 0; i < grid.t_axis.size(); ++i) {
    std::vector<std::string> row{format_double(grid.t_axis[i])};
    for (std::size_t j = 0; j < grid.h_axis.size(); ++j) row.push_back(format_double(grid.at(i, j)));
    out += csv_record(row);
  }
  return out;
}

nlohmann::json to_json(const SalubrityConfig& cfg) {
  return {{"mu_t", cfg.mu_t}, {"sigma_t", cfg.sigma_t}, {"mu_h", cfg.mu_h},
          {"sigma_h", cfg.sigma_h}, {"scale", cfg.scale}};
}

SalubrityConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorCode::kConfig, "salubrity config must be an object", {"salubrity"});
  SalubrityConfig cfg;
  auto read = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number())
      fail(ErrorCode::kConfig, std::string("salubrity.") + key + " must be a number",
           {std::string("salubrity.") + key});
    dst = j[key].get<double>();
  };
  read("mu_t", cfg.mu_t);
  read("sigma_t", cfg.sigma_t);
  read("mu_h", cfg.mu_h);
  read("sigma_h", cfg.sigma_h);
  read("scale", cfg.scale);
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const SalubrityScore& score) {
  return {{"value", score.value}, {"temp_factor", score.temp_factor},
          {"hum_factor", score.hum_factor}};
}

}  // namespace airq::salubrity
