#include "airq/sim/dht11.hpp"

#include <cmath>

#include "airq/error.hpp"

namespace airq::sim {
namespace {

struct Quantized {
  int value;
  bool clamped;
};

Quantized quantize(double v, int resolution, int lo, int hi) {
  const double steps = std::floor(v / resolution + 0.5);
  const double q = steps * resolution;
  if (!(q >= lo)) return {lo, true};  // also catches NaN
  if (q > hi) return {hi, true};
  return {static_cast<int>(q), false};
}

}  // namespace

void Dht11Spec::validate() const {
  if (t_resolution <= 0 || h_resolution <= 0)
    fail(ErrorCode::kInvalidParameter, "DHT-11 resolutions must be > 0", {"t_resolution", "h_resolution"});
  if (!(t_noise_sd >= 0) || !(h_noise_sd >= 0))
    fail(ErrorCode::kInvalidParameter, "DHT-11 noise SDs must be >= 0", {"t_noise_sd", "h_noise_sd"});
  if (t_min >= t_max || h_min >= h_max)
    fail(ErrorCode::kInvalidParameter, "DHT-11 ranges must be non-empty", {"t_min", "h_min"});
}

Dht11Reading dht11_quantize(double true_temp_c, double true_hum_pct, const Dht11Spec& spec,
                            NoiseDraw noise) {
  const auto t = quantize(true_temp_c + noise.t * spec.t_noise_sd, spec.t_resolution, spec.t_min,
                          spec.t_max);
  const auto h = quantize(true_hum_pct + noise.h * spec.h_noise_sd, spec.h_resolution, spec.h_min,
                          spec.h_max);
  Dht11Reading r{t.value, h.value, {}};
  if (t.clamped) r.flags.emplace_back("T_CLAMPED");
  if (h.clamped) r.flags.emplace_back("H_CLAMPED");
  return r;
}

}  // namespace airq::sim
