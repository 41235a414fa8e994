#include "mtbench/sampling.hpp"

#include <cmath>
#include <numeric>

#include "mtbench/error.hpp"

namespace mtbench::tokenizer {

SamplingPlan temperature_resample(const std::vector<std::size_t>& sizes, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::kNonpositiveTemperature, "temperature must be a positive real");
  }
  const double total =
      static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  if (total <= 0.0) {
    throw Error(ErrorKind::kAllEmpty, "every corpus is empty");
  }
  SamplingPlan plan;
  plan.temperature = temperature;
  plan.sizes = sizes;
  plan.weights.resize(sizes.size(), 0.0);
  const double exponent = 1.0 / temperature;
  double norm = 0.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) continue;
    plan.weights[i] = std::pow(static_cast<double>(sizes[i]) / total, exponent);
    norm += plan.weights[i];
  }
  for (double& w : plan.weights) w /= norm;
  return plan;
}

}  // namespace mtbench::tokenizer
