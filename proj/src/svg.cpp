#include "mtbench/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace mtbench::svg {

namespace {

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string open(int width, int height) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"10\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      width, height);
}

// White to dark blue.
std::string shade(double score) {
  const double t = std::clamp(score / 100.0, 0.0, 1.0);
  const auto channel = [t](int lo, int hi) {
    return static_cast<int>(std::lround(lo + (hi - lo) * t));
  };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(255, 8), channel(255, 48), channel(255, 107));
}

}  // namespace

std::string bar_chart(const std::vector<std::string>& labels,
                      const std::vector<std::size_t>& counts, const std::string& title) {
  const int bar = 36;
  const int gap = 8;
  const int left = 40;
  const int top = 30;
  const int plot_h = 200;
  const int width = left + static_cast<int>(counts.size()) * (bar + gap) + gap;
  const int height = top + plot_h + 40;
  const std::size_t peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());

  std::string out = open(width, height);
  out += fmt::format("<text x=\"{}\" y=\"18\" font-size=\"12\">{}</text>\n", left,
                     escape(title));
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
                     left, top + plot_h, width - gap);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int h = peak == 0 ? 0
                            : static_cast<int>(std::lround(static_cast<double>(counts[i]) *
                                                           plot_h / static_cast<double>(peak)));
    const int x = left + gap + static_cast<int>(i) * (bar + gap);
    out += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#3b6ea5\"/>\n", x,
        top + plot_h - h, bar, h);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       x + bar / 2, top + plot_h - h - 3, counts[i]);
    const std::string label = i < labels.size() ? labels[i] : "";
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                       x + bar / 2, top + plot_h + 14, escape(label));
  }
  out += "</svg>\n";
  return out;
}

std::string heatmap(const analysis::EvalMatrix& matrix, const std::vector<int>& clusters,
                    const std::string& title) {
  const int cell = 12;
  const int margin = 50;
  const int n = static_cast<int>(matrix.size());
  const int width = margin + n * cell + 10;
  const int height = margin + n * cell + 10;

  std::string out = open(width, height);
  if (!title.empty()) {
    out += fmt::format("<text x=\"4\" y=\"12\" font-size=\"12\">{}</text>\n", escape(title));
  }
  for (int i = 0; i < n; ++i) {
    const auto& code = escape(matrix.languages()[static_cast<std::size_t>(i)]);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", margin - 3,
                       margin + i * cell + cell - 2, code);
    out += fmt::format(
        "<text x=\"{0}\" y=\"{1}\" transform=\"rotate(-90 {0} {1})\">{2}</text>\n",
        margin + i * cell + cell - 2, margin - 3, code);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const auto v = matrix.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (!v) continue;
      out += fmt::format(
          "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\">"
          "<title>{:.2f}</title></rect>\n",
          margin + j * cell, margin + i * cell, cell, cell, shade(*v), *v);
    }
  }
  if (clusters.size() == matrix.size()) {
    for (int i = 1; i < n; ++i) {
      if (clusters[static_cast<std::size_t>(i)] == clusters[static_cast<std::size_t>(i - 1)]) {
        continue;
      }
      const int p = margin + i * cell;
      out += fmt::format(
          "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"red\"/>\n"
          "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"red\"/>\n",
          p, margin, margin + n * cell);
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace mtbench::svg
