#include <doctest.h>

#include <cmath>

#include "airq/error.hpp"
#include "airq/sim/dht11.hpp"
#include "airq/sim/mq135.hpp"
#include "oracles.hpp"

using namespace airq;
using namespace airq::sim;

TEST_CASE("dht11 rounds half up and clamps with flags") {
  const Dht11Spec spec;
  auto r = dht11_quantize(21.7, 40, spec);
  CHECK(r.temperature_c == 22);
  CHECK(r.flags.empty());
  r = dht11_quantize(21.5, 40.5, spec);
  CHECK(r.temperature_c == 22);
  CHECK(r.humidity_pct == 41);
  r = dht11_quantize(21.49, 40.49, spec);
  CHECK(r.temperature_c == 21);
  CHECK(r.humidity_pct == 40);
  r = dht11_quantize(55.0, 40, spec);
  CHECK(r.temperature_c == 50);
  CHECK(r.flags == std::vector<std::string>{"T_CLAMPED"});
  r = dht11_quantize(-3, 5, spec);
  CHECK(r.temperature_c == 0);
  CHECK(r.humidity_pct == 20);
  CHECK(r.flags == std::vector<std::string>{"T_CLAMPED", "H_CLAMPED"});
  r = dht11_quantize(20, 95, spec);
  CHECK(r.humidity_pct == 90);
  CHECK(r.flags == std::vector<std::string>{"H_CLAMPED"});
}

TEST_CASE("dht11 applies noise scaled by the configured SDs") {
  const Dht11Spec spec;  // sd 0.3 / 1.0
  const auto r = dht11_quantize(21.0, 40.0, spec, {2.0, -1.6});
  CHECK(r.temperature_c == 22);  // 21.6
  CHECK(r.humidity_pct == 38);   // 38.4
}

TEST_CASE("dht11 outputs stay within range for any input") {
  const Dht11Spec spec;
  for (double t = -100; t <= 150; t += 0.37)
    for (double h = -50; h <= 200; h += 3.1) {
      const auto r = dht11_quantize(t, h, spec);
      CHECK(r.temperature_c >= spec.t_min);
      CHECK(r.temperature_c <= spec.t_max);
      CHECK(r.humidity_pct >= spec.h_min);
      CHECK(r.humidity_pct <= spec.h_max);
    }
}

TEST_CASE("dht11 resolution above one unit") {
  Dht11Spec spec;
  spec.t_resolution = 2;
  CHECK(dht11_quantize(21.0, 40, spec).temperature_c == 22);
  CHECK(dht11_quantize(20.9, 40, spec).temperature_c == 20);
}

TEST_CASE("dht11 spec validation") {
  Dht11Spec spec;
  spec.t_resolution = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.h_noise_sd = -0.1;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("mq135 unity ratio on an equal divider is mid scale") {
  const Mq135Spec spec;
  CHECK(mq135_adc_from_ppm(spec.curve_a, spec) == 512);
}

TEST_CASE("mq135 ppm from mid-scale code") {
  const Mq135Spec spec;
  const double ppm = mq135_ppm_from_adc(512, spec);
  const double ratio = (1023.0 - 512.0) / 512.0;
  CHECK(ratio == doctest::Approx(0.99804).epsilon(1e-5));
  CHECK(ppm == doctest::Approx(110.0 * std::pow(ratio, -2.7)).epsilon(1e-12));
  CHECK(ppm == doctest::Approx(110.58).epsilon(1e-4));
}

TEST_CASE("mq135 half ratio gives 110 * 2^2.7") {
  // Rs/R0 = 0.5 with R_L = R0 means V_out/V_ref = 2/3, i.e. code 682 in 10 bits.
  Mq135Spec spec;
  spec.adc_bits = 10;
  const double exact = 110.0 * std::pow(2.0, 2.7);
  CHECK(exact == doctest::Approx(714.8).epsilon(1e-4));
  // 682/1023 = 2/3 exactly, so the inverse is exact up to rounding.
  CHECK(mq135_ppm_from_adc(682, spec) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("mq135 saturation and invalid ppm") {
  const Mq135Spec spec;
  for (int code : {0, -5, 1023, 4000}) {
    try {
      mq135_ppm_from_adc(code, spec);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSaturatedReading);
    }
  }
  for (double ppm : {0.0, -1.0, std::nan("")}) {
    try {
      mq135_adc_from_ppm(ppm, spec);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidParameter);
    }
  }
}

TEST_CASE("mq135 adc is monotone non-decreasing in ppm and stays in range") {
  const Mq135Spec spec;
  int prev = -1;
  for (double ppm = 0.01; ppm < 1e7; ppm *= 1.07) {
    const int code = mq135_adc_from_ppm(ppm, spec);
    CHECK(code >= 0);
    CHECK(code <= spec.adc_max());
    CHECK(code >= prev);
    prev = code;
  }
}

TEST_CASE("mq135 agrees with the brute-force code search") {
  const Mq135Spec spec;
  for (double ppm = 1; ppm < 5000; ppm *= 1.013) {
    const int code = mq135_adc_from_ppm(ppm, spec);
    const int brute = oracle::mq135_code_bruteforce(ppm, spec.adc_bits, spec.load_resistance, spec.r0,
                                                    spec.curve_a, spec.curve_b);
    // exact halfway cases may round either way in double precision
    CHECK(std::abs(code - brute) <= 1);
    if (code != brute) {
      const double frac = spec.load_resistance /
                          (spec.r0 * std::pow(ppm / spec.curve_a, 1 / spec.curve_b) + spec.load_resistance);
      CHECK(std::fabs(frac * spec.adc_max() - std::floor(frac * spec.adc_max()) - 0.5) < 1e-9);
    }
  }
}

TEST_CASE("mq135 round trip over every interior code") {
  for (int bits : {8, 10, 12}) {
    Mq135Spec spec;
    spec.adc_bits = bits;
    for (int code = 1; code < spec.adc_max(); ++code) {
      const double ppm = mq135_ppm_from_adc(code, spec);
      CHECK(ppm == doctest::Approx(static_cast<double>(oracle::mq135_ppm_for_code(
                                       code, bits, spec.load_resistance, spec.r0, spec.curve_a, spec.curve_b)))
                       .epsilon(1e-12));
      CHECK(mq135_adc_from_ppm(ppm, spec) == code);
    }
  }
}

TEST_CASE("mq135 spec validation") {
  Mq135Spec spec;
  spec.curve_b = 0.5;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.r0 = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.adc_bits = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
}
