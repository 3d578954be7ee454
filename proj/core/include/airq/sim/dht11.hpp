#pragma once

#include <string>
#include <vector>

namespace airq::sim {

// DHT-11 characteristics (datasheet values; resolutions are whole units).
struct Dht11Spec {
  int t_min = 0;
  int t_max = 50;
  int t_resolution = 1;
  int h_min = 20;
  int h_max = 90;
  int h_resolution = 1;
  double t_noise_sd = 0.3;
  double h_noise_sd = 1.0;

  void validate() const;
};

struct Dht11Reading {
  int temperature_c = 0;
  int humidity_pct = 0;
  std::vector<std::string> flags;  // "T_CLAMPED", "H_CLAMPED"
};

// Standard-normal draws, scaled by Dht11Spec's noise SDs.
struct NoiseDraw {
  double t = 0.0;
  double h = 0.0;
};

// Adds noise, rounds half-up to the resolution, then clamps to range with a flag.
Dht11Reading dht11_quantize(double true_temp_c, double true_hum_pct, const Dht11Spec& spec,
                            NoiseDraw noise = {});

}  // namespace airq::sim
