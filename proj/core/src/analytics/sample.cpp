#include "airq/analytics/sample.hpp"

namespace airq::analytics {

std::vector<Sample2D> label_by_salubrity(std::span<const Sample2D> samples,
                                         const salubrity::SalubrityConfig& cfg, double threshold) {
  std::vector<Sample2D> out(samples.begin(), samples.end());
  for (auto& s : out)
    s.label = salubrity::classify_salubrity(salubrity::salubrity(s.x, s.y, cfg), threshold);
  return out;
}

}  // namespace airq::analytics
