#pragma once

namespace airq::sim {

// MQ-135 behind a voltage divider and an ADC:
//   ppm = curve_a * (Rs / R0)^curve_b
//   V_out = v_ref * R_L / (Rs + R_L)
//   adc = round(V_out / v_ref * (2^adc_bits - 1))
// The curve constants are placeholders; calibrate per installation.
struct Mq135Spec {
  double r0 = 10'000.0;               // ohms, clean-air baseline
  double curve_a = 110.0;             // > 0
  double curve_b = -2.7;              // < 0
  int adc_bits = 10;
  double v_ref = 3.3;                 // volts
  double load_resistance = 10'000.0;  // ohms

  int adc_max() const { return (1 << adc_bits) - 1; }
  void validate() const;
};

// Throws Error{kInvalidParameter} for ppm <= 0 or non-finite.
int mq135_adc_from_ppm(double ppm, const Mq135Spec& spec);

// Throws Error{kSaturatedReading} for adc <= 0 or adc >= full scale.
double mq135_ppm_from_adc(int adc, const Mq135Spec& spec);

}  // namespace airq::sim
