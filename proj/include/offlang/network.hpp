#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "offlang/loss.hpp"
#include "offlang/matrix.hpp"
#include "offlang/model.hpp"
#include "offlang/rng.hpp"
#include "offlang/vocab.hpp"

namespace offlang {

inline constexpr double kLayerNormEps = 1e-5;

inline double gelu(double x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
}

inline double gelu_grad(double x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  return 0.5 * (1.0 + std::erf(x * inv_sqrt2)) +
         x * std::exp(-0.5 * x * x) * inv_sqrt2pi;
}

namespace detail {

inline void add_row_bias(Matrix& m, const std::vector<double>& b) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) row[c] += b[c];
  }
}

inline void add_col_sums(const Matrix& m, std::vector<double>& out) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c];
  }
}

// Row-wise layer norm. Stores the per-row mean and reciprocal standard
// deviation so the backward pass can reuse them.
inline void layer_norm(const Matrix& x, const std::vector<double>& gain,
                       const std::vector<double>& bias, Matrix& out,
                       std::vector<double>& mean, std::vector<double>& rstd) {
  const auto d = x.cols;
  out = Matrix(x.rows, d);
  mean.assign(x.rows, 0.0);
  rstd.assign(x.rows, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += xr[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double dv = xr[c] - mu;
      var += dv * dv;
    }
    var /= static_cast<double>(d);
    const double rs = 1.0 / std::sqrt(var + kLayerNormEps);
    mean[r] = mu;
    rstd[r] = rs;
    double* orow = out.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      orow[c] = gain[c] * (xr[c] - mu) * rs + bias[c];
    }
  }
}

// Backward of the above. Accumulates into dx, dgain, dbias.
inline void layer_norm_backward(const Matrix& x,
                                const std::vector<double>& gain,
                                const std::vector<double>& mean,
                                const std::vector<double>& rstd,
                                const Matrix& dy, Matrix& dx,
                                std::vector<double>& dgain,
                                std::vector<double>& dbias) {
  const auto d = x.cols;
  const double inv_d = 1.0 / static_cast<double>(d);
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double* xr = x.row(r);
    const double* dyr = dy.row(r);
    double* dxr = dx.row(r);
    const double mu = mean[r];
    const double rs = rstd[r];
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = (xr[c] - mu) * rs;
      const double g = gain[c] * dyr[c];
      s1 += g;
      s2 += g * xhat;
      dgain[c] += dyr[c] * xhat;
      dbias[c] += dyr[c];
    }
    s1 *= inv_d;
    s2 *= inv_d;
    for (std::size_t c = 0; c < d; ++c) {
      const double xhat = (xr[c] - mu) * rs;
      dxr[c] += rs * (gain[c] * dyr[c] - s1 - xhat * s2);
    }
  }
}

// Inverted dropout: kept entries are scaled by 1/(1-p) so eval needs no
// rescaling. The keep mask is recorded for the backward pass.
inline void apply_dropout(Matrix& m, double p, Rng& rng,
                          std::vector<std::uint8_t>& keep) {
  keep.assign(m.d.size(), 1);
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < m.d.size(); ++i) {
    if (rng.next_real() < p) {
      keep[i] = 0;
      m.d[i] = 0.0;
    } else {
      m.d[i] *= scale;
    }
  }
}

inline void dropout_backward(Matrix& grad, double p,
                             const std::vector<std::uint8_t>& keep) {
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < grad.d.size(); ++i) {
    grad.d[i] = keep[i] ? grad.d[i] * scale : 0.0;
  }
}

struct LayerCache {
  Matrix x_in;  // residual stream entering the layer
  Matrix ln1;
  std::vector<double> mu1, rs1;
  Matrix q, k, v;
  std::vector<Matrix> attn;  // one [len x len] weight matrix per (item, head)
  Matrix ctx;                // heads concatenated
  Matrix attn_out;           // after the output projection (and dropout)
  std::vector<std::uint8_t> keep1;
  Matrix h;  // x_in + attn_out
  Matrix ln2;
  std::vector<double> mu2, rs2;
  Matrix f1;   // feed-forward pre-activation
  Matrix act;  // gelu(f1)
  Matrix f2;   // after the second projection (and dropout)
  std::vector<std::uint8_t> keep2;
};

struct ForwardCache {
  std::size_t batch = 0;
  std::size_t len = 0;  // effective length: longest real prefix in the batch
  std::vector<int> ids;
  std::vector<std::uint8_t> mask;
  Matrix bow_mean;                // LinearBoW pooled means
  std::vector<double> bow_count;  // real non-CLS tokens per sample
  std::vector<LayerCache> layers;
  Matrix xf;  // residual stream entering the final layer norm
  Matrix lnf;
  std::vector<double> muf, rsf;
  Matrix pooled;  // one row per sample fed to the head
  Matrix logits, probs;
};

inline void softmax_rows(const Matrix& logits, Matrix& probs) {
  probs = Matrix(logits.rows, logits.cols);
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const double* lr = logits.row(r);
    double* pr = probs.row(r);
    double mx = lr[0];
    for (std::size_t c = 1; c < logits.cols; ++c) mx = std::max(mx, lr[c]);
    double sum = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      pr[c] = std::exp(lr[c] - mx);
      sum += pr[c];
    }
    for (std::size_t c = 0; c < logits.cols; ++c) pr[c] /= sum;
  }
}

// Full forward pass. Sequences are trimmed to the longest real prefix in
// the batch, so trailing all-PAD columns never enter the arithmetic at all
// and padding invariance holds bit for bit. When dropout_rng is non-null
// and spec.dropout > 0 the pass runs in training mode.
inline void run_forward(const ModelParams& p, const ClassifierSpec& spec,
                        const std::vector<Encoded>& batch, Rng* dropout_rng,
                        ForwardCache& fc) {
  spec.validate();
  if (batch.empty()) {
    throw std::invalid_argument("forward: empty batch");
  }
  const std::size_t full_len = batch[0].ids.size();
  std::size_t eff = 1;
  for (const Encoded& e : batch) {
    if (e.ids.size() != full_len || e.mask.size() != full_len) {
      throw std::invalid_argument("forward: ragged batch");
    }
    eff = std::max(eff, e.real_len());
  }
  if (full_len == 0) {
    throw std::invalid_argument("forward: zero-length sequences");
  }
  eff = std::min(eff, full_len);

  const std::size_t b_n = batch.size();
  const std::size_t d = static_cast<std::size_t>(spec.d_model);
  const std::size_t c_n = static_cast<std::size_t>(spec.num_classes);
  if (p.head_w.rows != d || p.head_w.cols != c_n || p.head_b.size() != c_n) {
    throw std::invalid_argument("forward: head shape mismatch");
  }
  if (p.tok_emb.cols != d) {
    throw std::invalid_argument("forward: embedding width mismatch");
  }

  fc = ForwardCache{};
  fc.batch = b_n;
  fc.len = eff;
  fc.ids.resize(b_n * eff);
  fc.mask.resize(b_n * eff);
  for (std::size_t b = 0; b < b_n; ++b) {
    if (!batch[b].mask[0]) {
      throw std::invalid_argument("forward: sequence without a real CLS slot");
    }
    for (std::size_t t = 0; t < eff; ++t) {
      const int id = batch[b].ids[t];
      if (id < 0 || static_cast<std::size_t>(id) >= p.tok_emb.rows) {
        throw std::invalid_argument("forward: token id outside vocabulary");
      }
      fc.ids[b * eff + t] = id;
      fc.mask[b * eff + t] = batch[b].mask[t];
    }
  }

  if (spec.kind == ModelKind::LinearBoW) {
    // Bag of tokens: mean embedding of the real non-CLS positions.
    fc.bow_mean = Matrix(b_n, d);
    fc.bow_count.assign(b_n, 0.0);
    for (std::size_t b = 0; b < b_n; ++b) {
      double count = 0.0;
      double* mrow = fc.bow_mean.row(b);
      for (std::size_t t = 1; t < eff; ++t) {
        if (!fc.mask[b * eff + t]) continue;
        count += 1.0;
        const double* emb =
            p.tok_emb.row(static_cast<std::size_t>(fc.ids[b * eff + t]));
        for (std::size_t j = 0; j < d; ++j) mrow[j] += emb[j];
      }
      if (count > 0.0) {
        for (std::size_t j = 0; j < d; ++j) mrow[j] /= count;
      }
      fc.bow_count[b] = count;
    }
    fc.pooled = fc.bow_mean;
    fc.logits = matmul(fc.pooled, p.head_w);
    add_row_bias(fc.logits, p.head_b);
    softmax_rows(fc.logits, fc.probs);
    return;
  }

  if (eff > p.pos_emb.rows || p.pos_emb.cols != d) {
    throw std::invalid_argument("forward: positional table shape mismatch");
  }
  if (p.layers.size() != static_cast<std::size_t>(spec.num_layers)) {
    throw std::invalid_argument("forward: layer count mismatch");
  }

  const std::size_t heads = static_cast<std::size_t>(spec.num_heads);
  const std::size_t dh = d / heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool train = dropout_rng != nullptr && spec.dropout > 0.0;

  Matrix x(b_n * eff, d);
  for (std::size_t r = 0; r < b_n * eff; ++r) {
    const double* emb = p.tok_emb.row(static_cast<std::size_t>(fc.ids[r]));
    const double* pos = p.pos_emb.row(r % eff);
    double* xr = x.row(r);
    for (std::size_t j = 0; j < d; ++j) xr[j] = emb[j] + pos[j];
  }

  fc.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const LayerParams& lp = p.layers[l];
    LayerCache& lc = fc.layers[l];
    lc.x_in = x;

    layer_norm(lc.x_in, lp.ln1_gain, lp.ln1_bias, lc.ln1, lc.mu1, lc.rs1);
    lc.q = matmul(lc.ln1, lp.wq);
    add_row_bias(lc.q, lp.bq);
    lc.k = matmul(lc.ln1, lp.wk);
    add_row_bias(lc.k, lp.bk);
    lc.v = matmul(lc.ln1, lp.wv);
    add_row_bias(lc.v, lp.bv);

    lc.ctx = Matrix(b_n * eff, d);
    lc.attn.assign(b_n * heads, Matrix());
    for (std::size_t b = 0; b < b_n; ++b) {
      const std::size_t base = b * eff;
      for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * dh;
        Matrix& a = lc.attn[b * heads + hd];
        a = Matrix(eff, eff);
        for (std::size_t i = 0; i < eff; ++i) {
          // Masked softmax over the keys. Padded keys get weight exactly
          // zero; position 0 (CLS) is always real so a max always exists.
          double mx = 0.0;
          bool seen = false;
          for (std::size_t j = 0; j < eff; ++j) {
            if (!fc.mask[base + j]) continue;
            double s = 0.0;
            const double* qi = lc.q.row(base + i) + off;
            const double* kj = lc.k.row(base + j) + off;
            for (std::size_t u = 0; u < dh; ++u) s += qi[u] * kj[u];
            s *= inv_sqrt_dh;
            a(i, j) = s;
            if (!seen || s > mx) {
              mx = s;
              seen = true;
            }
          }
          double sum = 0.0;
          for (std::size_t j = 0; j < eff; ++j) {
            if (!fc.mask[base + j]) {
              a(i, j) = 0.0;
              continue;
            }
            a(i, j) = std::exp(a(i, j) - mx);
            sum += a(i, j);
          }
          for (std::size_t j = 0; j < eff; ++j) {
            if (fc.mask[base + j]) a(i, j) /= sum;
          }
          double* crow = lc.ctx.row(base + i) + off;
          for (std::size_t j = 0; j < eff; ++j) {
            const double w = a(i, j);
            if (w == 0.0) continue;
            const double* vj = lc.v.row(base + j) + off;
            for (std::size_t u = 0; u < dh; ++u) crow[u] += w * vj[u];
          }
        }
      }
    }

    lc.attn_out = matmul(lc.ctx, lp.wo);
    add_row_bias(lc.attn_out, lp.bo);
    if (train) apply_dropout(lc.attn_out, spec.dropout, *dropout_rng, lc.keep1);

    lc.h = lc.x_in;
    add_inplace(lc.h, lc.attn_out);

    layer_norm(lc.h, lp.ln2_gain, lp.ln2_bias, lc.ln2, lc.mu2, lc.rs2);
    lc.f1 = matmul(lc.ln2, lp.w1);
    add_row_bias(lc.f1, lp.b1);
    lc.act = Matrix(lc.f1.rows, lc.f1.cols);
    for (std::size_t i = 0; i < lc.f1.d.size(); ++i) {
      lc.act.d[i] = gelu(lc.f1.d[i]);
    }
    lc.f2 = matmul(lc.act, lp.w2);
    add_row_bias(lc.f2, lp.b2);
    if (train) apply_dropout(lc.f2, spec.dropout, *dropout_rng, lc.keep2);

    x = lc.h;
    add_inplace(x, lc.f2);
  }

  fc.xf = x;
  layer_norm(fc.xf, p.lnf_gain, p.lnf_bias, fc.lnf, fc.muf, fc.rsf);

  fc.pooled = Matrix(b_n, d);
  for (std::size_t b = 0; b < b_n; ++b) {
    const double* cls = fc.lnf.row(b * eff);
    double* pr = fc.pooled.row(b);
    for (std::size_t j = 0; j < d; ++j) pr[j] = cls[j];
  }
  fc.logits = matmul(fc.pooled, p.head_w);
  add_row_bias(fc.logits, p.head_b);
  softmax_rows(fc.logits, fc.probs);
}

}  // namespace detail

struct Forwarded {
  Matrix logits;  // [batch x classes]
  Matrix probs;   // rows sum to one
};

// Inference-mode forward pass (dropout off).
inline Forwarded forward(const ModelParams& p, const ClassifierSpec& spec,
                         const std::vector<Encoded>& batch) {
  detail::ForwardCache fc;
  detail::run_forward(p, spec, batch, nullptr, fc);
  return {std::move(fc.logits), std::move(fc.probs)};
}

// Argmax over class probabilities; ties go to the lowest class index.
inline std::vector<int> predict(const ModelParams& p,
                                const ClassifierSpec& spec,
                                const std::vector<Encoded>& batch) {
  const Forwarded fw = forward(p, spec, batch);
  std::vector<int> out(fw.probs.rows);
  for (std::size_t r = 0; r < fw.probs.rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < fw.probs.cols; ++c) {
      if (fw.probs(r, c) > fw.probs(r, best)) best = c;
    }
    out[r] = static_cast<int>(best);
  }
  return out;
}

struct GradResult {
  double loss = 0.0;
  Matrix probs;
  ModelParams grads;
};

// Forward plus exact analytic backward of the weighted cross-entropy.
// Pass a dropout RNG to run in training mode; the backward pass replays
// the recorded keep masks so the gradient matches the sampled function.
namespace detail {

// Loss and gradients for one batch with shared accumulators. Reductions mix
// rows from every sample, so two numerically equivalent batches can round
// differently; the public entry point below calls this per sample to keep
// the mean gradient independent of how samples are grouped.
inline GradResult batch_gradients(const ModelParams& p,
                                  const ClassifierSpec& spec,
                                  const std::vector<Encoded>& batch,
                                  const std::vector<int>& labels,
                                  const std::vector<double>& weights,
                                  Rng* dropout_rng = nullptr) {
  detail::ForwardCache fc;
  detail::run_forward(p, spec, batch, dropout_rng, fc);

  GradResult res;
  res.loss = weighted_ce_loss(fc.probs, labels, weights);
  res.grads = zeros_like(p);

  const Matrix dlogits = ce_dlogits(fc.probs, labels, weights);
  add_inplace(res.grads.head_w, matmul_tn(fc.pooled, dlogits));
  detail::add_col_sums(dlogits, res.grads.head_b);
  Matrix dpooled = matmul_nt(dlogits, p.head_w);

  const std::size_t b_n = fc.batch;
  const std::size_t eff = fc.len;
  const std::size_t d = static_cast<std::size_t>(spec.d_model);

  if (spec.kind == ModelKind::LinearBoW) {
    for (std::size_t b = 0; b < b_n; ++b) {
      const double count = fc.bow_count[b];
      if (count == 0.0) continue;
      const double* dp = dpooled.row(b);
      for (std::size_t t = 1; t < eff; ++t) {
        if (!fc.mask[b * eff + t]) continue;
        double* gr = res.grads.tok_emb.row(
            static_cast<std::size_t>(fc.ids[b * eff + t]));
        for (std::size_t j = 0; j < d; ++j) gr[j] += dp[j] / count;
      }
    }
    res.probs = std::move(fc.probs);
    return res;
  }

  const std::size_t heads = static_cast<std::size_t>(spec.num_heads);
  const std::size_t dh = d / heads;
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool train = dropout_rng != nullptr && spec.dropout > 0.0;

  // Only the CLS rows of the final layer norm reach the head.
  Matrix dlnf(b_n * eff, d);
  for (std::size_t b = 0; b < b_n; ++b) {
    const double* dp = dpooled.row(b);
    double* dr = dlnf.row(b * eff);
    for (std::size_t j = 0; j < d; ++j) dr[j] = dp[j];
  }
  Matrix dx(b_n * eff, d);
  detail::layer_norm_backward(fc.xf, p.lnf_gain, fc.muf, fc.rsf, dlnf, dx,
                              res.grads.lnf_gain, res.grads.lnf_bias);

  for (std::size_t l = p.layers.size(); l-- > 0;) {
    const LayerParams& lp = p.layers[l];
    const detail::LayerCache& lc = fc.layers[l];
    LayerParams& gl = res.grads.layers[l];

    // x_out = h + f2
    Matrix dh_total = dx;
    Matrix df2 = std::move(dx);
    if (train) detail::dropout_backward(df2, spec.dropout, lc.keep2);

    // f2 = act * w2 + b2
    add_inplace(gl.w2, matmul_tn(lc.act, df2));
    detail::add_col_sums(df2, gl.b2);
    Matrix dact = matmul_nt(df2, lp.w2);

    // act = gelu(f1)
    Matrix df1 = std::move(dact);
    for (std::size_t i = 0; i < df1.d.size(); ++i) {
      df1.d[i] *= gelu_grad(lc.f1.d[i]);
    }

    // f1 = ln2 * w1 + b1
    add_inplace(gl.w1, matmul_tn(lc.ln2, df1));
    detail::add_col_sums(df1, gl.b1);
    const Matrix dln2 = matmul_nt(df1, lp.w1);

    detail::layer_norm_backward(lc.h, lp.ln2_gain, lc.mu2, lc.rs2, dln2,
                                dh_total, gl.ln2_gain, gl.ln2_bias);

    // h = x_in + attn_out
    Matrix dx_in = dh_total;
    Matrix dattn_out = std::move(dh_total);
    if (train) detail::dropout_backward(dattn_out, spec.dropout, lc.keep1);

    // attn_out = ctx * wo + bo
    add_inplace(gl.wo, matmul_tn(lc.ctx, dattn_out));
    detail::add_col_sums(dattn_out, gl.bo);
    const Matrix dctx = matmul_nt(dattn_out, lp.wo);

    Matrix dq(b_n * eff, d), dk(b_n * eff, d), dv(b_n * eff, d);
    for (std::size_t b = 0; b < b_n; ++b) {
      const std::size_t base = b * eff;
      for (std::size_t hd = 0; hd < heads; ++hd) {
        const std::size_t off = hd * dh;
        const Matrix& a = lc.attn[b * heads + hd];
        for (std::size_t i = 0; i < eff; ++i) {
          const double* dci = dctx.row(base + i) + off;
          // ctx_i = sum_j a_ij v_j: accumulate dv and the raw da row.
          std::vector<double> da(eff, 0.0);
          for (std::size_t j = 0; j < eff; ++j) {
            const double w = a(i, j);
            if (w == 0.0 && !fc.mask[base + j]) continue;
            const double* vj = lc.v.row(base + j) + off;
            double* dvj = dv.row(base + j) + off;
            double acc = 0.0;
            for (std::size_t u = 0; u < dh; ++u) {
              acc += dci[u] * vj[u];
              dvj[u] += w * dci[u];
            }
            da[j] = acc;
          }
          // Softmax backward on the masked row: padded keys hold weight
          // zero and stay zero.
          double inner = 0.0;
          for (std::size_t j = 0; j < eff; ++j) inner += a(i, j) * da[j];
          double* dqi = dq.row(base + i) + off;
          const double* qi = lc.q.row(base + i) + off;
          for (std::size_t j = 0; j < eff; ++j) {
            const double ds = a(i, j) * (da[j] - inner) * inv_sqrt_dh;
            if (ds == 0.0) continue;
            const double* kj = lc.k.row(base + j) + off;
            double* dkj = dk.row(base + j) + off;
            for (std::size_t u = 0; u < dh; ++u) {
              dqi[u] += ds * kj[u];
              dkj[u] += ds * qi[u];
            }
          }
        }
      }
    }

    // q/k/v = ln1 * w + b
    add_inplace(gl.wq, matmul_tn(lc.ln1, dq));
    detail::add_col_sums(dq, gl.bq);
    add_inplace(gl.wk, matmul_tn(lc.ln1, dk));
    detail::add_col_sums(dk, gl.bk);
    add_inplace(gl.wv, matmul_tn(lc.ln1, dv));
    detail::add_col_sums(dv, gl.bv);
    Matrix dln1 = matmul_nt(dq, lp.wq);
    add_inplace(dln1, matmul_nt(dk, lp.wk));
    add_inplace(dln1, matmul_nt(dv, lp.wv));

    detail::layer_norm_backward(lc.x_in, lp.ln1_gain, lc.mu1, lc.rs1, dln1,
                                dx_in, gl.ln1_gain, gl.ln1_bias);
    dx = std::move(dx_in);
  }

  for (std::size_t r = 0; r < b_n * eff; ++r) {
    const double* dxr = dx.row(r);
    double* gt = res.grads.tok_emb.row(static_cast<std::size_t>(fc.ids[r]));
    double* gp = res.grads.pos_emb.row(r % eff);
    for (std::size_t j = 0; j < d; ++j) {
      gt[j] += dxr[j];
      gp[j] += dxr[j];
    }
  }

  res.probs = std::move(fc.probs);
  return res;
}

}  // namespace detail

// Weighted cross-entropy loss plus gradients for every parameter. The
// result is the mean of per-sample gradients: each sample's backward pass
// runs in its own buffers and the averages are taken at the end, so
// duplicating a sample or regrouping the same samples into different
// batches cannot perturb the numbers.
inline GradResult loss_and_gradients(const ModelParams& p,
                                     const ClassifierSpec& spec,
                                     const std::vector<Encoded>& batch,
                                     const std::vector<int>& labels,
                                     const std::vector<double>& weights,
                                     Rng* dropout_rng = nullptr) {
  if (labels.size() != batch.size()) {
    throw std::invalid_argument("loss_and_gradients: label count mismatch");
  }
  if (batch.empty()) {
    throw std::invalid_argument("forward: empty batch");
  }
  const std::size_t full_len = batch[0].ids.size();
  for (const Encoded& e : batch) {
    if (e.ids.size() != full_len || e.mask.size() != full_len) {
      throw std::invalid_argument("forward: ragged batch");
    }
  }

  const std::size_t b_n = batch.size();
  GradResult total;
  total.grads = zeros_like(p);
  total.probs = Matrix(b_n, static_cast<std::size_t>(spec.num_classes));
  const auto dst = tensor_refs(total.grads);
  double loss_sum = 0.0;
  for (std::size_t b = 0; b < b_n; ++b) {
    const GradResult one = detail::batch_gradients(
        p, spec, {batch[b]}, {labels[b]}, weights, dropout_rng);
    loss_sum += one.loss;
    const auto src = tensor_refs(one.grads);
    for (std::size_t t = 0; t < dst.size(); ++t) {
      auto& acc = *dst[t].data;
      const auto& add = *src[t].data;
      for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += add[j];
    }
    for (std::size_t c = 0; c < total.probs.cols; ++c) {
      total.probs(b, c) = one.probs(0, c);
    }
  }
  const double nb = static_cast<double>(b_n);
  total.loss = loss_sum / nb;
  for (const auto& ref : dst) {
    for (double& g : *ref.data) g /= nb;
  }
  return total;
}

}  // namespace offlang
