#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace airq::salubrity {

// Gaussian comfort model: S(T, H) = scale * f(T; mu_t, sigma_t) * f(H; mu_h, sigma_h)
// with f(x; mu, sigma) = exp(-(x - mu)^2 / (2 sigma^2)).
//
// The spreads have no canonical value; 4 degC and 12 %RH are engineering
// defaults and every deployment is expected to carry them in config.
struct SalubrityConfig {
  double mu_t = 21.0;     // degC
  double sigma_t = 4.0;   // degC, > 0
  double mu_h = 40.0;     // %RH
  double sigma_h = 12.0;  // %RH, > 0
  double scale = 100.0;   // peak index value

  // Throws Error{kInvalidParameter} naming the offending field.
  void validate() const;

  friend bool operator==(const SalubrityConfig&, const SalubrityConfig&) = default;
};

struct SalubrityScore {
  double value = 0.0;        // (0, scale]
  double temp_factor = 0.0;  // (0, 1]
  double hum_factor = 0.0;   // (0, 1]

  friend bool operator==(const SalubrityScore&, const SalubrityScore&) = default;
};

enum class Label { kSafe, kUnsafe };

const char* to_string(Label label);
Label label_from_string(const std::string& text);

struct SurfaceGrid {
  std::vector<double> t_axis;
  std::vector<double> h_axis;
  std::vector<double> values;  // row-major, t_axis.size() x h_axis.size()

  double at(std::size_t ti, std::size_t hj) const { return values[ti * h_axis.size() + hj]; }
};

// Throws Error{kInvalidParameter} for non-finite x/mu or sigma <= 0.
double gaussian_factor(double x, double mu, double sigma);

SalubrityScore salubrity(double temp_c, double hum_pct, const SalubrityConfig& cfg);

// Evenly spaced axes, endpoints included; each cell is salubrity(t, h, cfg).value.
SurfaceGrid surface_grid(const SalubrityConfig& cfg, double t_min, double t_max, double h_min,
                         double h_max, std::size_t steps);

// value == threshold counts as SAFE.
Label classify_salubrity(const SalubrityScore& score, double threshold);

// {"t_axis":[...],"h_axis":[...],"values":[[...],...]}
nlohmann::json to_json(const SurfaceGrid& grid);
// Header row is "t\h" followed by h_axis; each data row starts with its t value.
std::string to_csv(const SurfaceGrid& grid);

nlohmann::json to_json(const SalubrityConfig& cfg);
SalubrityConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SalubrityScore& score);

}  // namespace airq::salubrity
