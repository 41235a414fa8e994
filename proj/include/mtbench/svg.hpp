#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mtbench/analysis.hpp"

namespace mtbench::svg {

std::string bar_chart(const std::vector<std::string>& labels,
                      const std::vector<std::size_t>& counts, const std::string& title);

// Cells shaded by score on [0, 100]; absent cells left blank. Thin lines mark
// boundaries between consecutive clusters when `clusters` is given in the
// matrix's language order.
std::string heatmap(const analysis::EvalMatrix& matrix, const std::vector<int>& clusters = {},
                    const std::string& title = "");

}  // namespace mtbench::svg
