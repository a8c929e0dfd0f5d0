#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "offlang/adam.hpp"
#include "offlang/checkpoint.hpp"
#include "offlang/loss.hpp"
#include "offlang/model.hpp"
#include "offlang/network.hpp"
#include "offlang/rng.hpp"
#include "offlang/vocab.hpp"

using namespace offlang;

namespace {

Encoded enc(std::vector<int> ids, std::size_t real) {
  Encoded e;
  e.mask.assign(ids.size(), 0);
  for (std::size_t i = 0; i < real; ++i) e.mask[i] = 1;
  e.ids = std::move(ids);
  return e;
}

ClassifierSpec small_spec(ModelKind kind = ModelKind::MiniTransformer) {
  ClassifierSpec spec;
  spec.kind = kind;
  spec.d_model = 8;
  spec.num_heads = 2;
  spec.num_layers = 1;
  spec.max_len = 8;
  spec.num_classes = 2;
  spec.ffn_mult = 2;
  spec.dropout = 0.0;
  return spec;
}

std::vector<Encoded> small_batch(Rng& rng, int vocab_size) {
  // Lengths cover a full row, a padded row, and a near-empty row, so the
  // masked-attention path is exercised by the finite-difference check.
  const std::vector<std::size_t> lens = {8, 5, 2};
  std::vector<Encoded> batch;
  for (const std::size_t len : lens) {
    std::vector<int> ids(8, Vocab::kPad);
    ids[0] = Vocab::kCls;
    for (std::size_t i = 1; i < len; ++i) {
      ids[i] = 4 + static_cast<int>(rng.next_below(
                       static_cast<std::uint64_t>(vocab_size - 4)));
    }
    batch.push_back(enc(ids, len));
  }
  return batch;
}

double loss_at(const ModelParams& p, const ClassifierSpec& spec,
               const std::vector<Encoded>& batch,
               const std::vector<int>& labels,
               const std::vector<double>& weights) {
  const Forwarded fw = forward(p, spec, batch);
  return weighted_ce_loss(fw.probs, labels, weights);
}

// Central finite differences over every parameter; returns the worst
// relative error against the analytic gradient.
double max_fd_rel_err(ModelParams& p, const ClassifierSpec& spec,
                      const std::vector<Encoded>& batch,
                      const std::vector<int>& labels,
                      const std::vector<double>& weights) {
  const GradResult gr = loss_and_gradients(p, spec, batch, labels, weights);
  ModelParams grads = gr.grads;
  const auto prefs = tensor_refs(p);
  const auto grefs = tensor_refs(grads);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t t = 0; t < prefs.size(); ++t) {
    auto& pd = *prefs[t].data;
    const auto& gd = *grefs[t].data;
    REQUIRE(pd.size() == gd.size());
    for (std::size_t j = 0; j < pd.size(); ++j) {
      const double save = pd[j];
      pd[j] = save + h;
      const double lp = loss_at(p, spec, batch, labels, weights);
      pd[j] = save - h;
      const double lm = loss_at(p, spec, batch, labels, weights);
      pd[j] = save;
      const double fd = (lp - lm) / (2.0 * h);
      const double g = gd[j];
      const double rel = std::abs(fd - g) /
                         std::max({std::abs(fd), std::abs(g), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

bool same_params(const ModelParams& a, const ModelParams& b) {
  const auto ar = tensor_refs(a);
  const auto br = tensor_refs(b);
  if (ar.size() != br.size()) return false;
  for (std::size_t i = 0; i < ar.size(); ++i) {
    if (*ar[i].data != *br[i].data) return false;
  }
  return true;
}

Checkpoint sample_checkpoint() {
  Checkpoint ck;
  ck.spec = small_spec();
  ck.scheme = LabelScheme::Binary;
  ck.language = Language::Marathi;
  const std::vector<std::string> corpus = {"one two three", "two three",
                                           "three"};
  ck.vocab = build_vocab(corpus, 50);
  ck.params = init_params(ck.spec, ck.vocab.size(), 5);
  return ck;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences", "[gradients]") {
  const ClassifierSpec spec = small_spec();
  const std::vector<int> labels = {0, 1, 1};
  const std::vector<double> weights = {1.3, 0.7};
  for (std::uint64_t draw = 0; draw < 3; ++draw) {
    Rng rng = Rng::stream(100 + draw, 0x666477);
    ModelParams p = init_params(spec, 12, 200 + draw);
    const auto batch = small_batch(rng, 12);
    const double worst = max_fd_rel_err(p, spec, batch, labels, weights);
    INFO("draw " << draw << " worst rel err " << worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("bag-of-words gradients match finite differences", "[gradients]") {
  const ClassifierSpec spec = small_spec(ModelKind::LinearBoW);
  Rng rng = Rng::stream(300, 0x666477);
  ModelParams p = init_params(spec, 12, 301);
  const auto batch = small_batch(rng, 12);
  const double worst =
      max_fd_rel_err(p, spec, batch, {1, 0, 1}, {0.9, 1.1});
  CHECK(worst < 1e-6);
}

TEST_CASE("duplicated samples leave the mean gradient unchanged",
          "[gradients]") {
  const ClassifierSpec spec = small_spec();
  const ModelParams p = init_params(spec, 12, 77);
  const Encoded x = enc({2, 5, 6, 7, 0, 0, 0, 0}, 4);
  const std::vector<double> w = {1.0, 1.0};

  const GradResult one = loss_and_gradients(p, spec, {x}, {1}, w);
  const GradResult two = loss_and_gradients(p, spec, {x, x}, {1, 1}, w);
  CHECK(one.loss == two.loss);
  CHECK(same_params(one.grads, two.grads));
}

TEST_CASE("gradients are linear in the class weights", "[gradients]") {
  const ClassifierSpec spec = small_spec();
  const ModelParams p = init_params(spec, 12, 78);
  Rng rng = Rng::stream(400, 0x666477);
  const auto batch = small_batch(rng, 12);
  const std::vector<int> labels = {0, 1, 0};

  const GradResult base =
      loss_and_gradients(p, spec, batch, labels, {0.8, 1.2});
  const GradResult doubled =
      loss_and_gradients(p, spec, batch, labels, {1.6, 2.4});
  CHECK(doubled.loss == 2.0 * base.loss);

  const auto br = tensor_refs(base.grads);
  const auto dr = tensor_refs(doubled.grads);
  REQUIRE(br.size() == dr.size());
  for (std::size_t i = 0; i < br.size(); ++i) {
    const auto& b = *br[i].data;
    const auto& d = *dr[i].data;
    REQUIRE(b.size() == d.size());
    for (std::size_t j = 0; j < b.size(); ++j) {
      CHECK(d[j] == 2.0 * b[j]);
    }
  }
}

TEST_CASE("training mode keeps gradients consistent with its own forward",
          "[gradients]") {
  // With dropout active the sampled network changes, but the backward pass
  // must still differentiate exactly the function that was sampled. The
  // check reruns the same stream prefix and compares losses.
  ClassifierSpec spec = small_spec();
  spec.dropout = 0.5;
  const ModelParams p = init_params(spec, 12, 79);
  Rng rng = Rng::stream(500, 0x666477);
  const auto batch = small_batch(rng, 12);

  Rng d1 = Rng::stream(1, kStreamDropout);
  Rng d2 = Rng::stream(1, kStreamDropout);
  const GradResult a =
      loss_and_gradients(p, spec, batch, {0, 1, 1}, {1.0, 1.0}, &d1);
  const GradResult b =
      loss_and_gradients(p, spec, batch, {0, 1, 1}, {1.0, 1.0}, &d2);
  CHECK(a.loss == b.loss);
  CHECK(same_params(a.grads, b.grads));

  // A different dropout stream almost surely samples a different network.
  Rng d3 = Rng::stream(2, kStreamDropout);
  const GradResult c =
      loss_and_gradients(p, spec, batch, {0, 1, 1}, {1.0, 1.0}, &d3);
  CHECK(a.loss != c.loss);
}

TEST_CASE("adam leaves parameters alone on zero gradients", "[adam]") {
  const ClassifierSpec spec = small_spec();
  ModelParams p = init_params(spec, 12, 80);
  const ModelParams before = p;
  ModelParams grads = zeros_like(p);
  AdamState st = make_adam_state(p);
  adam_step(p, grads, st, 1e-3);
  adam_step(p, grads, st, 1e-3);
  CHECK(st.t == 2);
  CHECK(same_params(p, before));
}

TEST_CASE("first adam step moves by roughly lr times sign", "[adam]") {
  const ClassifierSpec spec = small_spec(ModelKind::LinearBoW);
  ModelParams p = init_params(spec, 8, 81);
  const ModelParams before = p;
  ModelParams grads = zeros_like(p);
  Rng rng = Rng::stream(82, 0x6164616D);
  const auto grefs = tensor_refs(grads);
  for (const auto& r : grefs) {
    for (double& g : *r.data) {
      g = (rng.next_below(2) == 0 ? 1.0 : -1.0) * (0.1 + rng.next_real());
    }
  }
  AdamState st = make_adam_state(p);
  const double lr = 1e-3;
  adam_step(p, grads, st, lr);

  const auto pr = tensor_refs(p);
  const auto br = tensor_refs(before);
  for (std::size_t i = 0; i < pr.size(); ++i) {
    for (std::size_t j = 0; j < pr[i].data->size(); ++j) {
      const double delta = (*pr[i].data)[j] - (*br[i].data)[j];
      const double g = (*tensor_refs(grads)[i].data)[j];
      const double expected = -lr * g / (std::abs(g) + 1e-8);
      CHECK_THAT(delta, Catch::Matchers::WithinAbs(expected, 1e-12));
      CHECK_THAT(delta, Catch::Matchers::WithinAbs(
                            g > 0 ? -lr : lr, lr * 1e-4));
    }
  }
}

TEST_CASE("adam recurrence matches a scalar oracle", "[adam]") {
  // Minimal parameter set: a bag-of-words model with a 1x1 embedding.
  ClassifierSpec spec;
  spec.kind = ModelKind::LinearBoW;
  spec.d_model = 1;
  spec.num_heads = 1;
  spec.num_layers = 1;
  spec.max_len = 2;
  spec.num_classes = 2;
  ModelParams p = shaped_params(spec, 1);
  p.tok_emb(0, 0) = 0.5;

  ModelParams grads = zeros_like(p);
  AdamState st = make_adam_state(p);
  const double lr = 0.01;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;

  // One nonzero gradient step followed by two zero steps; momentum keeps
  // the parameter moving with a decaying update.
  const std::vector<double> gs = {1.0, 0.0, 0.0, 0.0, 0.0};
  double om = 0.0, ov = 0.0, oracle = 0.5;
  std::vector<double> deltas;
  for (std::size_t step = 0; step < gs.size(); ++step) {
    grads.tok_emb(0, 0) = gs[step];
    const double before = p.tok_emb(0, 0);
    adam_step(p, grads, st, lr);
    deltas.push_back(p.tok_emb(0, 0) - before);

    const double t = static_cast<double>(step + 1);
    om = b1 * om + (1.0 - b1) * gs[step];
    ov = b2 * ov + (1.0 - b2) * gs[step] * gs[step];
    const double m_hat = om / (1.0 - std::pow(b1, t));
    const double v_hat = ov / (1.0 - std::pow(b2, t));
    oracle -= lr * m_hat / (std::sqrt(v_hat) + eps);
    REQUIRE_THAT(p.tok_emb(0, 0),
                 Catch::Matchers::WithinRel(oracle, 1e-12));
  }
  // Updates after the gradient pulse keep its sign and decay.
  CHECK(deltas[1] < 0.0);
  CHECK(deltas[2] < 0.0);
  CHECK(std::abs(deltas[2]) < std::abs(deltas[1]));
  CHECK(std::abs(deltas[4]) < std::abs(deltas[3]));
}

TEST_CASE("checkpoints round-trip exactly", "[checkpoint]") {
  const Checkpoint ck = sample_checkpoint();
  const std::string bytes = serialize_checkpoint(ck);
  const Checkpoint back = parse_checkpoint(bytes);

  CHECK(back.spec.kind == ck.spec.kind);
  CHECK(back.spec.d_model == ck.spec.d_model);
  CHECK(back.spec.num_heads == ck.spec.num_heads);
  CHECK(back.spec.num_layers == ck.spec.num_layers);
  CHECK(back.spec.max_len == ck.spec.max_len);
  CHECK(back.spec.num_classes == ck.spec.num_classes);
  CHECK(back.spec.ffn_mult == ck.spec.ffn_mult);
  CHECK(back.spec.dropout == ck.spec.dropout);
  CHECK(back.scheme == ck.scheme);
  CHECK(back.language == ck.language);
  CHECK(back.vocab.id_to_token == ck.vocab.id_to_token);
  CHECK(same_params(back.params, ck.params));

  // Serialization of the parsed copy is byte-identical.
  CHECK(serialize_checkpoint(back) == bytes);
}

TEST_CASE("checkpoint parsing rejects damage", "[checkpoint]") {
  const Checkpoint ck = sample_checkpoint();
  const std::string bytes = serialize_checkpoint(ck);

  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(parse_checkpoint(magic), ParseError);

  std::string version = bytes;
  version[4] = 9;
  CHECK_THROWS_AS(parse_checkpoint(version), ParseError);

  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 5)),
                  ParseError);
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, 10)), ParseError);
  CHECK_THROWS_AS(parse_checkpoint(bytes + "x"), ParseError);
  CHECK_THROWS_AS(parse_checkpoint(""), ParseError);

  std::string header = bytes;
  header[16] = 'q';  // first byte of the JSON header
  CHECK_THROWS_AS(parse_checkpoint(header), ParseError);

  // Reserved vocabulary slots must keep their spellings.
  std::string vocab = bytes;
  const auto at = vocab.find("[PAD]");
  REQUIRE(at != std::string::npos);
  vocab.replace(at, 5, "[BAD]");
  CHECK_THROWS_AS(parse_checkpoint(vocab), ParseError);
}

TEST_CASE("checkpoint files save and load", "[checkpoint]") {
  const Checkpoint ck = sample_checkpoint();
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "offlang-ck-test.olk1";
  save_checkpoint(ck, path.string());
  const Checkpoint back = load_checkpoint(path.string());
  CHECK(same_params(back.params, ck.params));
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_checkpoint((dir / "offlang-missing.olk1").string()),
                  UserError);
}
