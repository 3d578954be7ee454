#pragma once

// Reference computations written independently of the library code paths.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace airq::oracle {

// exp(-(x - mu)^2 / (2 sigma^2)) evaluated in long double.
inline long double gaussian(long double x, long double mu, long double sigma) {
  const long double z = (x - mu) / sigma;
  return std::exp(-0.5L * z * z);
}

struct Line {
  long double slope;
  long double intercept;
};

// Solves [n  Sx; Sx Sxx] [b; m] = [Sy; Sxy] by Cramer's rule with raw (uncentred) sums.
inline Line normal_equations(const std::vector<double>& x, const std::vector<double>& y) {
  long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double det = n * sxx - sx * sx;
  const long double b = (sy * sxx - sx * sxy) / det;
  const long double m = (n * sxy - sx * sy) / det;
  return {m, b};
}

// MQ-135 divider voltage for a code, from first principles.
inline long double mq135_ratio_for_code(int code, int bits, long double r_load, long double r0) {
  const long double full = std::ldexp(1.0L, bits) - 1.0L;
  const long double frac = code / full;        // V_out / V_ref
  const long double rs = r_load * (1.0L / frac - 1.0L);
  return rs / r0;
}

inline long double mq135_ppm_for_code(int code, int bits, long double r_load, long double r0, long double a,
                                      long double b) {
  return a * std::pow(mq135_ratio_for_code(code, bits, r_load, r0), b);
}

// Code whose exact divider fraction is nearest the fraction produced by ppm,
// found by scanning the whole code space.
inline int mq135_code_bruteforce(long double ppm, int bits, long double r_load, long double r0, long double a,
                                 long double b) {
  const long double rs = r0 * std::pow(ppm / a, 1.0L / b);
  const long double frac = r_load / (rs + r_load);
  const int full = (1 << bits) - 1;
  int best = 0;
  long double best_err = std::numeric_limits<long double>::infinity();
  for (int c = 0; c <= full; ++c) {
    const long double err = std::fabs(static_cast<long double>(c) / full - frac);
    if (err < best_err) {
      best_err = err;
      best = c;
    }
  }
  return best;
}

}  // namespace airq::oracle
