#pragma once

#include <optional>
#include <span>
#include <vector>

#include "airq/salubrity.hpp"

namespace airq::analytics {

using salubrity::Label;

// One (temperature, humidity) observation; label is present for classifiers.
struct Sample2D {
  double x = 0.0;  // temperature, degC
  double y = 0.0;  // humidity, %RH
  std::optional<Label> label;

  double feature(int index) const { return index == 0 ? x : y; }
};

// SVM label encoding: SAFE = +1, UNSAFE = -1.
inline int sign_of(Label label) { return label == Label::kSafe ? 1 : -1; }
inline Label label_of_sign(double decision) { return decision >= 0 ? Label::kSafe : Label::kUnsafe; }

// Labels samples via classify_salubrity(salubrity(x, y, cfg), threshold).
std::vector<Sample2D> label_by_salubrity(std::span<const Sample2D> samples,
                                         const salubrity::SalubrityConfig& cfg, double threshold);

}  // namespace airq::analytics
