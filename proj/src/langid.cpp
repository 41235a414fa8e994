#include "mtbench/langid.hpp"

#include <algorithm>
#include <cmath>

#include "mtbench/error.hpp"
#include "mtbench/unicode.hpp"

namespace mtbench::qa {

std::map<std::u32string, double> trigram_counts(std::string_view text) {
  std::u32string units = U" ";
  for (char32_t c : unicode::decode_lossless(unicode::to_lower_ascii(text))) {
    units.push_back(unicode::is_whitespace(c) ? U' ' : c);
  }
  units.push_back(U' ');
  std::map<std::u32string, double> counts;
  for (std::size_t i = 0; i + 3 <= units.size(); ++i) counts[units.substr(i, 3)] += 1.0;
  return counts;
}

void LangProfileSet::add_language(const std::string& code, const std::vector<std::string>& texts,
                                  std::size_t top_k) {
  std::map<std::u32string, double> counts;
  for (const auto& t : texts) {
    for (const auto& [gram, c] : trigram_counts(t)) counts[gram] += c;
  }
  std::vector<std::pair<std::u32string, double>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > top_k) ranked.resize(top_k);
  Profile p;
  for (const auto& [gram, c] : ranked) {
    p.weights.emplace(gram, c);
    p.norm += c * c;
  }
  p.norm = std::sqrt(p.norm);
  profiles_[code] = std::move(p);
}

bool LangProfileSet::has_language(std::string_view code) const {
  return profiles_.find(code) != profiles_.end();
}

std::vector<std::string> LangProfileSet::languages() const {
  std::vector<std::string> out;
  for (const auto& [code, p] : profiles_) out.push_back(code);
  return out;
}

std::map<std::string, double> LangProfileSet::similarities(std::string_view text) const {
  const auto counts = trigram_counts(text);
  double norm = 0.0;
  for (const auto& [gram, c] : counts) norm += c * c;
  norm = std::sqrt(norm);
  std::map<std::string, double> out;
  for (const auto& [code, p] : profiles_) {
    double dot = 0.0;
    for (const auto& [gram, c] : counts) {
      auto it = p.weights.find(gram);
      if (it != p.weights.end()) dot += c * it->second;
    }
    out[code] = (norm > 0.0 && p.norm > 0.0) ? dot / (norm * p.norm) : 0.0;
  }
  return out;
}

std::string LangProfileSet::predict(std::string_view text) const {
  if (profiles_.empty()) throw Error(ErrorKind::kUntrainedModel, "no language profiles loaded");
  const auto sims = similarities(text);
  auto best = sims.begin();
  for (auto it = sims.begin(); it != sims.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

}  // namespace mtbench::qa
