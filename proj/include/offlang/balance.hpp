#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "offlang/corpus.hpp"
#include "offlang/errors.hpp"
#include "offlang/labels.hpp"

namespace offlang {

// Per-class loss multipliers, carried at full precision. The weight for
// class c is total / (num_classes * n_c): rare classes get weights above 1,
// frequent ones below, and the frequency-weighted mean of the weights is
// exactly 1.
struct ClassWeights {
  std::vector<double> weights;  // canonical class order
  ClassCounts source_counts;
};

inline ClassWeights class_weights(const ClassCounts& counts) {
  const auto c = static_cast<double>(counts.counts.size());
  ClassWeights out;
  out.source_counts = counts;
  out.weights.reserve(counts.counts.size());
  for (std::size_t i = 0; i < counts.counts.size(); ++i) {
    if (counts.counts[i] <= 0) {
      throw ValidationError(
          "class weight undefined: class '" +
          std::string(class_names(counts.scheme)[i]) + "' has count " +
          std::to_string(counts.counts[i]));
    }
    out.weights.push_back(static_cast<double>(counts.total) /
                          (c * static_cast<double>(counts.counts[i])));
  }
  return out;
}

inline std::vector<double> unit_weights(int num_classes) {
  return std::vector<double>(static_cast<std::size_t>(num_classes), 1.0);
}

// 4-decimal display value. The published weight tables truncate toward zero
// rather than rounding half-up (e.g. 3843/5002 = 0.76829 prints as 0.7682),
// so the display view does the same. Weights are always positive.
inline double display_weight(double w) {
  return std::floor(w * 10000.0) / 10000.0;
}

inline std::string format_weight(double w) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", display_weight(w));
  return buf;
}

inline std::string format_weight_table(const ClassWeights& cw) {
  const auto names = class_names(cw.source_counts.scheme);
  std::string out = "class   count   weight\n";
  for (std::size_t i = 0; i < cw.weights.size(); ++i) {
    char line[96];
    std::snprintf(line, sizeof(line), "%-6s %7lld   %s\n",
                  std::string(names[i]).c_str(),
                  static_cast<long long>(cw.source_counts.counts[i]),
                  format_weight(cw.weights[i]).c_str());
    out += line;
  }
  return out;
}

}  // namespace offlang
