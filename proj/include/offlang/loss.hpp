#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "offlang/matrix.hpp"

namespace offlang {

// Probabilities are clamped away from 0 and 1 before the log so a saturated
// softmax cannot produce an infinite loss.
inline constexpr double kProbEps = 1e-12;

inline double clamp_prob(double p) {
  return std::min(std::max(p, kProbEps), 1.0 - kProbEps);
}

// Mean over the batch of w[y_i] * -log p_i[y_i]. `probs` is [B x C] with
// rows summing to one, `labels` holds class indices, `weights` has one
// entry per class.
inline double weighted_ce_loss(const Matrix& probs,
                               const std::vector<int>& labels,
                               const std::vector<double>& weights) {
  if (probs.rows != labels.size()) {
    throw std::invalid_argument("weighted_ce_loss: batch size mismatch");
  }
  if (probs.cols != weights.size()) {
    throw std::invalid_argument("weighted_ce_loss: class count mismatch");
  }
  if (probs.rows == 0) {
    throw std::invalid_argument("weighted_ce_loss: empty batch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= probs.cols) {
      throw std::invalid_argument("weighted_ce_loss: label out of range");
    }
    total += weights[static_cast<std::size_t>(y)] *
             -std::log(clamp_prob(probs(i, static_cast<std::size_t>(y))));
  }
  return total / static_cast<double>(probs.rows);
}

// Gradient of the mean weighted cross-entropy with respect to the logits:
// row i is (p_i - onehot(y_i)) * w[y_i] / B. Exact for the softmax + NLL
// composition, so the clamp above never enters the gradient path.
inline Matrix ce_dlogits(const Matrix& probs, const std::vector<int>& labels,
                         const std::vector<double>& weights) {
  if (probs.rows != labels.size()) {
    throw std::invalid_argument("ce_dlogits: batch size mismatch");
  }
  if (probs.cols != weights.size()) {
    throw std::invalid_argument("ce_dlogits: class count mismatch");
  }
  Matrix g(probs.rows, probs.cols);
  const double inv_b = 1.0 / static_cast<double>(probs.rows);
  for (std::size_t i = 0; i < probs.rows; ++i) {
    const auto y = static_cast<std::size_t>(labels[i]);
    const double wy = weights[y];
    for (std::size_t c = 0; c < probs.cols; ++c) {
      const double target = (c == y) ? 1.0 : 0.0;
      g(i, c) = (probs(i, c) - target) * wy * inv_b;
    }
  }
  return g;
}

}  // namespace offlang
