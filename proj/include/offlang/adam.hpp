#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "offlang/model.hpp"

namespace offlang {

// First and second moment estimates, shaped like the parameters they track.
// t counts completed steps; bias correction uses t+1 on the next call.
struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t t = 0;
};

inline AdamState make_adam_state(const ModelParams& p) {
  AdamState st;
  st.m = zeros_like(p);
  st.v = zeros_like(p);
  st.t = 0;
  return st;
}

// Standard Adam with bias correction:
//   m <- b1 m + (1-b1) g        m_hat = m / (1 - b1^t)
//   v <- b2 v + (1-b2) g^2      v_hat = v / (1 - b2^t)
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
inline void adam_step(ModelParams& params, ModelParams& grads, AdamState& st,
                      double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8) {
  ++st.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(st.t));

  auto pr = tensor_refs(params);
  auto gr = tensor_refs(grads);
  auto mr = tensor_refs(st.m);
  auto vr = tensor_refs(st.v);
  if (pr.size() != gr.size() || pr.size() != mr.size() ||
      pr.size() != vr.size()) {
    throw std::invalid_argument("adam_step: tensor list mismatch");
  }
  for (std::size_t i = 0; i < pr.size(); ++i) {
    auto& pd = *pr[i].data;
    const auto& gd = *gr[i].data;
    auto& md = *mr[i].data;
    auto& vd = *vr[i].data;
    if (pd.size() != gd.size() || pd.size() != md.size() ||
        pd.size() != vd.size()) {
      throw std::invalid_argument("adam_step: tensor shape mismatch at " +
                                  pr[i].name);
    }
    for (std::size_t j = 0; j < pd.size(); ++j) {
      const double g = gd[j];
      md[j] = beta1 * md[j] + (1.0 - beta1) * g;
      vd[j] = beta2 * vd[j] + (1.0 - beta2) * g * g;
      const double m_hat = md[j] / bc1;
      const double v_hat = vd[j] / bc2;
      pd[j] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

}  // namespace offlang
