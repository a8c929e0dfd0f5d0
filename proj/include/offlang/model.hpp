#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "offlang/errors.hpp"
#include "offlang/matrix.hpp"
#include "offlang/rng.hpp"

namespace offlang {

enum class ModelKind { MiniTransformer, LinearBoW };

// Architecture configuration for the desk-scale classifiers.
struct ClassifierSpec {
  ModelKind kind = ModelKind::MiniTransformer;
  int d_model = 64;
  int num_heads = 2;
  int num_layers = 2;
  int max_len = 64;
  int num_classes = 2;
  int ffn_mult = 4;
  double dropout = 0.1;

  // Spec fields arrive from CLI flags and config files, so violations are
  // user errors rather than programming mistakes.
  void validate() const {
    if (d_model <= 0 || num_heads <= 0 || num_layers <= 0 ||
        num_classes <= 1 || ffn_mult <= 0) {
      throw ValidationError("classifier spec: sizes must be positive");
    }
    if (d_model % num_heads != 0) {
      throw ValidationError("classifier spec: num_heads must divide d_model");
    }
    if (max_len < 2) {
      throw ValidationError("classifier spec: max_len must be >= 2");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
      throw ValidationError("classifier spec: dropout must be in [0,1)");
    }
  }
};

struct LayerParams {
  std::vector<double> ln1_gain, ln1_bias;
  Matrix wq, wk, wv, wo;                  // each [d_model x d_model]
  std::vector<double> bq, bk, bv, bo;     // each [d_model]
  std::vector<double> ln2_gain, ln2_bias;
  Matrix w1;                              // [d_model x ffn]
  std::vector<double> b1;                 // [ffn]
  Matrix w2;                              // [ffn x d_model]
  std::vector<double> b2;                 // [d_model]
};

// Every trainable tensor of a classifier. The LinearBoW kind only populates
// the token embeddings and the head; the transformer fills everything.
struct ModelParams {
  Matrix tok_emb;                    // [vocab x d_model]
  Matrix pos_emb;                    // [max_len x d_model]
  std::vector<LayerParams> layers;
  std::vector<double> lnf_gain, lnf_bias;
  Matrix head_w;                     // [d_model x num_classes]
  std::vector<double> head_b;        // [num_classes]
};

// Flat view over one tensor, used by the optimizer, the checkpoint writer,
// and the finite-difference harness. Traversal order is fixed and is part
// of the checkpoint format.
struct TensorRef {
  std::string name;
  std::vector<double>* data;
  std::size_t rows, cols;  // cols == 1 for vectors
};

inline std::vector<TensorRef> tensor_refs(ModelParams& p) {
  std::vector<TensorRef> refs;
  const auto mat = [&](const std::string& name, Matrix& m) {
    if (!m.d.empty()) refs.push_back({name, &m.d, m.rows, m.cols});
  };
  const auto vec = [&](const std::string& name, std::vector<double>& v) {
    if (!v.empty()) refs.push_back({name, &v, v.size(), 1});
  };
  mat("tok_emb", p.tok_emb);
  mat("pos_emb", p.pos_emb);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    LayerParams& lp = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    vec(pre + "ln1_gain", lp.ln1_gain);
    vec(pre + "ln1_bias", lp.ln1_bias);
    mat(pre + "wq", lp.wq);
    vec(pre + "bq", lp.bq);
    mat(pre + "wk", lp.wk);
    vec(pre + "bk", lp.bk);
    mat(pre + "wv", lp.wv);
    vec(pre + "bv", lp.bv);
    mat(pre + "wo", lp.wo);
    vec(pre + "bo", lp.bo);
    vec(pre + "ln2_gain", lp.ln2_gain);
    vec(pre + "ln2_bias", lp.ln2_bias);
    mat(pre + "w1", lp.w1);
    vec(pre + "b1", lp.b1);
    mat(pre + "w2", lp.w2);
    vec(pre + "b2", lp.b2);
  }
  vec("lnf_gain", p.lnf_gain);
  vec("lnf_bias", p.lnf_bias);
  mat("head_w", p.head_w);
  vec("head_b", p.head_b);
  return refs;
}

struct ConstTensorRef {
  std::string name;
  const std::vector<double>* data;
  std::size_t rows, cols;
};

inline std::vector<ConstTensorRef> tensor_refs(const ModelParams& p) {
  auto refs = tensor_refs(const_cast<ModelParams&>(p));
  std::vector<ConstTensorRef> out;
  out.reserve(refs.size());
  for (const TensorRef& r : refs) out.push_back({r.name, r.data, r.rows, r.cols});
  return out;
}

// Same-shape zero clone; gradient and optimizer-state buffers come from
// here so they always mirror the parameter layout.
inline ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  z.tok_emb = Matrix(p.tok_emb.rows, p.tok_emb.cols);
  z.pos_emb = Matrix(p.pos_emb.rows, p.pos_emb.cols);
  z.layers.resize(p.layers.size());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const LayerParams& s = p.layers[l];
    LayerParams& d = z.layers[l];
    d.ln1_gain.assign(s.ln1_gain.size(), 0.0);
    d.ln1_bias.assign(s.ln1_bias.size(), 0.0);
    d.wq = Matrix(s.wq.rows, s.wq.cols);
    d.wk = Matrix(s.wk.rows, s.wk.cols);
    d.wv = Matrix(s.wv.rows, s.wv.cols);
    d.wo = Matrix(s.wo.rows, s.wo.cols);
    d.bq.assign(s.bq.size(), 0.0);
    d.bk.assign(s.bk.size(), 0.0);
    d.bv.assign(s.bv.size(), 0.0);
    d.bo.assign(s.bo.size(), 0.0);
    d.ln2_gain.assign(s.ln2_gain.size(), 0.0);
    d.ln2_bias.assign(s.ln2_bias.size(), 0.0);
    d.w1 = Matrix(s.w1.rows, s.w1.cols);
    d.b1.assign(s.b1.size(), 0.0);
    d.w2 = Matrix(s.w2.rows, s.w2.cols);
    d.b2.assign(s.b2.size(), 0.0);
  }
  z.lnf_gain.assign(p.lnf_gain.size(), 0.0);
  z.lnf_bias.assign(p.lnf_bias.size(), 0.0);
  z.head_w = Matrix(p.head_w.rows, p.head_w.cols);
  z.head_b.assign(p.head_b.size(), 0.0);
  return z;
}

// Correctly shaped zero parameters, used when loading a checkpoint and as
// the single source of truth for which tensors each model kind owns.
inline ModelParams shaped_params(const ClassifierSpec& spec, int vocab_size) {
  spec.validate();
  if (vocab_size <= 0) {
    throw std::invalid_argument("shaped_params: vocab_size must be positive");
  }
  const auto d = static_cast<std::size_t>(spec.d_model);
  const auto ffn = static_cast<std::size_t>(spec.d_model * spec.ffn_mult);
  const auto c = static_cast<std::size_t>(spec.num_classes);

  ModelParams p;
  p.tok_emb = Matrix(static_cast<std::size_t>(vocab_size), d);
  if (spec.kind == ModelKind::MiniTransformer) {
    p.pos_emb = Matrix(static_cast<std::size_t>(spec.max_len), d);
    p.layers.resize(static_cast<std::size_t>(spec.num_layers));
    for (LayerParams& lp : p.layers) {
      lp.ln1_gain.assign(d, 0.0);
      lp.ln1_bias.assign(d, 0.0);
      lp.wq = Matrix(d, d);
      lp.wk = Matrix(d, d);
      lp.wv = Matrix(d, d);
      lp.wo = Matrix(d, d);
      lp.bq.assign(d, 0.0);
      lp.bk.assign(d, 0.0);
      lp.bv.assign(d, 0.0);
      lp.bo.assign(d, 0.0);
      lp.ln2_gain.assign(d, 0.0);
      lp.ln2_bias.assign(d, 0.0);
      lp.w1 = Matrix(d, ffn);
      lp.b1.assign(ffn, 0.0);
      lp.w2 = Matrix(ffn, d);
      lp.b2.assign(d, 0.0);
    }
    p.lnf_gain.assign(d, 0.0);
    p.lnf_bias.assign(d, 0.0);
  }
  p.head_w = Matrix(d, c);
  p.head_b.assign(c, 0.0);
  return p;
}

// BERT-convention initialization: weights from a seeded normal with
// sigma = 0.02, biases zero, layer-norm gains one.
inline ModelParams init_params(const ClassifierSpec& spec, int vocab_size,
                               std::uint64_t seed) {
  spec.validate();
  const auto d = static_cast<std::size_t>(spec.d_model);
  const auto ffn = static_cast<std::size_t>(spec.d_model * spec.ffn_mult);
  const auto c = static_cast<std::size_t>(spec.num_classes);
  Rng rng = Rng::stream(seed, kStreamInit);
  const auto fill = [&](Matrix& m, std::size_t r, std::size_t cl) {
    m = Matrix(r, cl);
    for (double& x : m.d) x = rng.next_normal(0.0, 0.02);
  };

  ModelParams p;
  fill(p.tok_emb, static_cast<std::size_t>(vocab_size), d);
  if (spec.kind == ModelKind::MiniTransformer) {
    fill(p.pos_emb, static_cast<std::size_t>(spec.max_len), d);
    p.layers.resize(static_cast<std::size_t>(spec.num_layers));
    for (LayerParams& lp : p.layers) {
      lp.ln1_gain.assign(d, 1.0);
      lp.ln1_bias.assign(d, 0.0);
      fill(lp.wq, d, d);
      fill(lp.wk, d, d);
      fill(lp.wv, d, d);
      fill(lp.wo, d, d);
      lp.bq.assign(d, 0.0);
      lp.bk.assign(d, 0.0);
      lp.bv.assign(d, 0.0);
      lp.bo.assign(d, 0.0);
      lp.ln2_gain.assign(d, 1.0);
      lp.ln2_bias.assign(d, 0.0);
      fill(lp.w1, d, ffn);
      lp.b1.assign(ffn, 0.0);
      fill(lp.w2, ffn, d);
      lp.b2.assign(d, 0.0);
    }
    p.lnf_gain.assign(d, 1.0);
    p.lnf_bias.assign(d, 0.0);
  }
  fill(p.head_w, d, c);
  p.head_b.assign(c, 0.0);
  return p;
}

}  // namespace offlang
