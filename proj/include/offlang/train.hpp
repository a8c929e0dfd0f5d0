#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "offlang/adam.hpp"
#include "offlang/balance.hpp"
#include "offlang/checkpoint.hpp"
#include "offlang/corpus.hpp"
#include "offlang/errors.hpp"
#include "offlang/eval.hpp"
#include "offlang/network.hpp"
#include "offlang/preprocess.hpp"
#include "offlang/rng.hpp"
#include "offlang/vocab.hpp"

namespace offlang {

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  // Desk-scale default. The published regimen's 2e-5 suits a pretrained
  // encoder; a model trained from scratch at this size needs a larger step
  // to move off its random start within 20 epochs. Configurable either way.
  double learning_rate = 1e-3;
  bool weighted = false;
  std::uint64_t seed = 1;
  bool shuffle = true;
  // Fixed off: training always runs the full epoch budget.
  static constexpr bool early_stopping = false;
  std::size_t vocab_max_size = 30000;

  void validate() const {
    if (epochs < 1) throw ValidationError("epochs must be at least 1");
    if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ValidationError("learning_rate must be positive and finite");
    }
    if (vocab_max_size <= 4) {
      throw ValidationError("vocab_max_size must exceed the 4 reserved ids");
    }
  }
};

struct TrainHistory {
  std::vector<double> loss;            // per-epoch mean training loss
  std::vector<double> train_macro_f1;  // scored on the training set
  double wall_seconds = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  TrainHistory history;
};

// Full training run: cleans text, builds the vocabulary, trains for exactly
// cfg.epochs epochs with a per-epoch shuffle that depends only on
// (seed, epoch), and returns the final parameters. No early stopping and no
// best-epoch selection; the last epoch's weights are the result.
inline TrainResult train(const Dataset& data, const ClassifierSpec& spec,
                         const TrainConfig& cfg) {
  cfg.validate();
  spec.validate();
  if (data.posts.empty()) {
    throw ValidationError("training dataset is empty");
  }
  if (spec.num_classes != num_classes(data.scheme)) {
    throw std::invalid_argument(
        "train: spec.num_classes does not match the label scheme");
  }
  const auto start_time = std::chrono::steady_clock::now();

  std::vector<std::string> cleaned;
  cleaned.reserve(data.posts.size());
  for (const Post& post : data.posts) {
    cleaned.push_back(clean_for_model(post.text, post.language));
  }
  const Vocab vocab = build_vocab(cleaned, cfg.vocab_max_size);

  std::vector<Encoded> encoded;
  std::vector<int> labels;
  encoded.reserve(cleaned.size());
  labels.reserve(cleaned.size());
  for (std::size_t i = 0; i < cleaned.size(); ++i) {
    encoded.push_back(encode(cleaned[i], vocab, spec.max_len));
    labels.push_back(data.posts[i].label.index);
  }

  const std::vector<double> weights =
      cfg.weighted ? class_weights(dataset_stats(data)).weights
                   : unit_weights(spec.num_classes);

  ModelParams params = init_params(spec, vocab.size(), cfg.seed);
  AdamState adam = make_adam_state(params);
  Rng dropout_rng = Rng::stream(cfg.seed, kStreamDropout);

  TrainHistory history;
  const std::size_t n = encoded.size();
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);

  std::vector<std::size_t> order(n);
  std::vector<Encoded> batch_inputs;
  std::vector<int> batch_labels;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (cfg.shuffle) {
      Rng shuffle_rng = Rng::stream(cfg.seed, kStreamShuffle,
                                    static_cast<std::uint64_t>(epoch));
      shuffle_rng.shuffle(order);
    }

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      batch_inputs.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < stop; ++i) {
        batch_inputs.push_back(encoded[order[i]]);
        batch_labels.push_back(labels[order[i]]);
      }
      GradResult res = loss_and_gradients(params, spec, batch_inputs,
                                          batch_labels, weights, &dropout_rng);
      adam_step(params, res.grads, adam, cfg.learning_rate);
      loss_sum += res.loss * static_cast<double>(stop - start);
    }
    history.loss.push_back(loss_sum / static_cast<double>(n));

    // Score the epoch on the training set in inference mode.
    std::vector<int> preds;
    preds.reserve(n);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(start + batch, n);
      batch_inputs.assign(encoded.begin() + static_cast<std::ptrdiff_t>(start),
                          encoded.begin() + static_cast<std::ptrdiff_t>(stop));
      const std::vector<int> p = predict(params, spec, batch_inputs);
      preds.insert(preds.end(), p.begin(), p.end());
    }
    history.train_macro_f1.push_back(
        macro_f1(confusion(preds, labels, spec.num_classes)));
  }

  history.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    start_time)
          .count();

  TrainResult result;
  result.checkpoint.spec = spec;
  result.checkpoint.scheme = data.scheme;
  result.checkpoint.language = data.posts.front().language;
  result.checkpoint.vocab = vocab;
  result.checkpoint.params = std::move(params);
  result.history = std::move(history);
  return result;
}

// Trains once per seed and scores each model on the held-out split.
inline SeedSweepReport seed_sweep(const Dataset& train_data,
                                  const Dataset& test_data,
                                  const ClassifierSpec& spec,
                                  const TrainConfig& cfg,
                                  const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) {
    throw ValidationError("seed sweep needs at least 2 seeds");
  }
  std::vector<std::pair<std::uint64_t, double>> results;
  results.reserve(seeds.size());
  for (const std::uint64_t seed : seeds) {
    TrainConfig run_cfg = cfg;
    run_cfg.seed = seed;
    const TrainResult trained = train(train_data, spec, run_cfg);
    const EvalReport report = evaluate(trained.checkpoint, test_data);
    results.emplace_back(seed, report.macro_f1);
  }
  return aggregate_sweep(std::move(results));
}

}  // namespace offlang
