#include "airq/sim/mq135.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "airq/error.hpp"

namespace airq::sim {

void Mq135Spec::validate() const {
  if (!(r0 > 0)) fail(ErrorCode::kInvalidParameter, "mq135.r0 must be > 0", {"r0"});
  if (!(curve_a > 0)) fail(ErrorCode::kInvalidParameter, "mq135.curve_a must be > 0", {"curve_a"});
  if (!(curve_b < 0)) fail(ErrorCode::kInvalidParameter, "mq135.curve_b must be < 0", {"curve_b"});
  if (adc_bits < 2 || adc_bits > 24)
    fail(ErrorCode::kInvalidParameter, "mq135.adc_bits must be in [2, 24]", {"adc_bits"});
  if (!(v_ref > 0)) fail(ErrorCode::kInvalidParameter, "mq135.v_ref must be > 0", {"v_ref"});
  if (!(load_resistance > 0))
    fail(ErrorCode::kInvalidParameter, "mq135.load_resistance must be > 0", {"load_resistance"});
}

int mq135_adc_from_ppm(double ppm, const Mq135Spec& spec) {
  if (!std::isfinite(ppm) || !(ppm > 0))
    fail(ErrorCode::kInvalidParameter, "ppm must be finite and > 0", {"ppm"});
  const double ratio = std::pow(ppm / spec.curve_a, 1.0 / spec.curve_b);
  const double rs = ratio * spec.r0;
  const double v_out = spec.v_ref * spec.load_resistance / (rs + spec.load_resistance);
  const int full = spec.adc_max();
  const double code = std::floor(v_out / spec.v_ref * full + 0.5);
  return static_cast<int>(std::clamp(code, 0.0, static_cast<double>(full)));
}

double mq135_ppm_from_adc(int adc, const Mq135Spec& spec) {
  const int full = spec.adc_max();
  if (adc <= 0 || adc >= full)
    fail(ErrorCode::kSaturatedReading,
         "ADC code " + std::to_string(adc) + " is saturated (valid interior range is 1.." +
             std::to_string(full - 1) + ")",
         {"mq135_adc"});
  // V_out / v_ref = adc / full  =>  Rs = R_L * (full - adc) / adc
  const double rs = spec.load_resistance * static_cast<double>(full - adc) / static_cast<double>(adc);
  return spec.curve_a * std::pow(rs / spec.r0, spec.curve_b);
}

}  // namespace airq::sim
