#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mtbench::qa {

// Add-one smoothed character n-gram model with per-sentence NLL calibration
// statistics taken over its own training sentences.
class CharLm {
 public:
  explicit CharLm(int order = 5) : order_(order) {}

  void train(const std::vector<std::string>& sentences);
  bool trained() const { return trained_; }
  int order() const { return order_; }

  // Mean negative log-likelihood (nats) per scalar, end-of-sentence included.
  // Throws UntrainedModel.
  double nll_per_char(std::string_view text) const;

  double calibration_mean() const { return mean_; }
  double calibration_stddev() const { return stddev_; }

 private:
  struct Hash {
    std::size_t operator()(const std::u32string& s) const noexcept;
  };

  int order_;
  bool trained_ = false;
  double vocab_ = 0.0;
  std::unordered_map<std::u32string, double, Hash> context_counts_;
  std::unordered_map<std::u32string, double, Hash> event_counts_;
  double mean_ = 0.0;
  double stddev_ = 0.0;
};

}  // namespace mtbench::qa
