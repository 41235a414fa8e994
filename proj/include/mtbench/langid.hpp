#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mtbench::qa {

// Character-trigram frequency profiles compared by cosine similarity.
class LangProfileSet {
 public:
  static constexpr std::size_t kDefaultTopK = 1000;

  void add_language(const std::string& code, const std::vector<std::string>& texts,
                    std::size_t top_k = kDefaultTopK);
  bool has_language(std::string_view code) const;
  std::vector<std::string> languages() const;

  // Cosine similarity against every profile.
  std::map<std::string, double> similarities(std::string_view text) const;

  // Highest-similarity language; ties go to the smallest code.
  std::string predict(std::string_view text) const;

 private:
  struct Profile {
    std::map<std::u32string, double> weights;
    double norm = 0.0;
  };
  std::map<std::string, Profile, std::less<>> profiles_;
};

std::map<std::u32string, double> trigram_counts(std::string_view text);

}  // namespace mtbench::qa
