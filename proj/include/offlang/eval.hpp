#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "offlang/checkpoint.hpp"
#include "offlang/corpus.hpp"
#include "offlang/errors.hpp"
#include "offlang/labels.hpp"
#include "offlang/network.hpp"
#include "offlang/preprocess.hpp"
#include "offlang/vocab.hpp"

namespace offlang {

// Square count matrix, rows = gold class, cols = predicted class.
struct ConfusionMatrix {
  std::size_t classes = 0;
  std::vector<std::int64_t> cells;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t n) : classes(n), cells(n * n, 0) {}

  std::int64_t& at(std::size_t gold, std::size_t pred) {
    return cells[gold * classes + pred];
  }
  std::int64_t at(std::size_t gold, std::size_t pred) const {
    return cells[gold * classes + pred];
  }
  std::int64_t total() const {
    std::int64_t t = 0;
    for (const std::int64_t c : cells) t += c;
    return t;
  }
};

inline ConfusionMatrix confusion(const std::vector<int>& preds,
                                 const std::vector<int>& golds,
                                 int num_classes) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("confusion: length mismatch");
  }
  if (num_classes <= 0) {
    throw std::invalid_argument("confusion: num_classes must be positive");
  }
  ConfusionMatrix m(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int g = golds[i];
    const int p = preds[i];
    if (g < 0 || g >= num_classes || p < 0 || p >= num_classes) {
      throw std::invalid_argument("confusion: class index out of range");
    }
    ++m.at(static_cast<std::size_t>(g), static_cast<std::size_t>(p));
  }
  return m;
}

struct PerClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision, recall, and F1 per class with every 0/0 resolved to 0, the
// convention of the usual shared-task scorers.
inline std::vector<PerClassMetrics> per_class_metrics(
    const ConfusionMatrix& m) {
  std::vector<PerClassMetrics> out(m.classes);
  for (std::size_t c = 0; c < m.classes; ++c) {
    std::int64_t tp = m.at(c, c);
    std::int64_t gold_total = 0, pred_total = 0;
    for (std::size_t j = 0; j < m.classes; ++j) {
      gold_total += m.at(c, j);
      pred_total += m.at(j, c);
    }
    PerClassMetrics& pc = out[c];
    pc.precision = pred_total > 0
                       ? static_cast<double>(tp) / static_cast<double>(pred_total)
                       : 0.0;
    pc.recall = gold_total > 0
                    ? static_cast<double>(tp) / static_cast<double>(gold_total)
                    : 0.0;
    const double denom = pc.precision + pc.recall;
    pc.f1 = denom > 0.0 ? 2.0 * pc.precision * pc.recall / denom : 0.0;
  }
  return out;
}

inline double macro_f1(const ConfusionMatrix& m) {
  if (m.classes == 0) return 0.0;
  const auto per = per_class_metrics(m);
  double sum = 0.0;
  for (const PerClassMetrics& pc : per) sum += pc.f1;
  return sum / static_cast<double>(m.classes);
}

inline double accuracy(const ConfusionMatrix& m) {
  const std::int64_t total = m.total();
  if (total == 0) return 0.0;
  std::int64_t correct = 0;
  for (std::size_t c = 0; c < m.classes; ++c) correct += m.at(c, c);
  return static_cast<double>(correct) / static_cast<double>(total);
}

struct EvalReport {
  LabelScheme scheme = LabelScheme::Binary;
  std::vector<PerClassMetrics> per_class;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix matrix;
};

inline EvalReport make_eval_report(const ConfusionMatrix& m,
                                   LabelScheme scheme) {
  if (m.classes != static_cast<std::size_t>(num_classes(scheme))) {
    throw std::invalid_argument("make_eval_report: scheme size mismatch");
  }
  EvalReport r;
  r.scheme = scheme;
  r.per_class = per_class_metrics(m);
  r.macro_f1 = offlang::macro_f1(m);
  r.accuracy = offlang::accuracy(m);
  r.matrix = m;
  return r;
}

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
  nlohmann::json per = nlohmann::json::object();
  const auto names = class_names(r.scheme);
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    per[std::string(names[c])] = {{"precision", r.per_class[c].precision},
                                  {"recall", r.per_class[c].recall},
                                  {"f1", r.per_class[c].f1}};
  }
  nlohmann::json matrix = nlohmann::json::array();
  for (std::size_t g = 0; g < r.matrix.classes; ++g) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t p = 0; p < r.matrix.classes; ++p) {
      row.push_back(r.matrix.at(g, p));
    }
    matrix.push_back(std::move(row));
  }
  return nlohmann::json{{"per_class", std::move(per)},
                        {"macro_f1", r.macro_f1},
                        {"accuracy", r.accuracy},
                        {"matrix", std::move(matrix)}};
}

inline std::string eval_report_json(const EvalReport& r) {
  return eval_report_to_json(r).dump(2) + "\n";
}

namespace detail {

inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

inline std::string eval_report_table(const EvalReport& r) {
  const auto names = class_names(r.scheme);
  std::string out;
  out += "class      precision    recall        f1\n";
  for (std::size_t c = 0; c < r.per_class.size(); ++c) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s %9s %9s %9s\n",
                  std::string(names[c]).c_str(),
                  detail::fixed4(r.per_class[c].precision).c_str(),
                  detail::fixed4(r.per_class[c].recall).c_str(),
                  detail::fixed4(r.per_class[c].f1).c_str());
    out += line;
  }
  out += "macro F1   " + detail::fixed4(r.macro_f1) + "\n";
  out += "accuracy   " + detail::fixed4(r.accuracy) + "\n";
  out += "\nconfusion matrix (rows gold, cols predicted)\n";
  char head[160];
  std::snprintf(head, sizeof head, "%-6s", "");
  out += head;
  for (std::size_t p = 0; p < r.matrix.classes; ++p) {
    char cell[32];
    std::snprintf(cell, sizeof cell, " %6s", std::string(names[p]).c_str());
    out += cell;
  }
  out += "\n";
  for (std::size_t g = 0; g < r.matrix.classes; ++g) {
    char label[32];
    std::snprintf(label, sizeof label, "%-6s", std::string(names[g]).c_str());
    out += label;
    for (std::size_t p = 0; p < r.matrix.classes; ++p) {
      char cell[32];
      std::snprintf(cell, sizeof cell, " %6lld",
                    static_cast<long long>(r.matrix.at(g, p)));
      out += cell;
    }
    out += "\n";
  }
  return out;
}

// Runs a trained checkpoint over a labeled dataset and scores it.
inline EvalReport evaluate(const Checkpoint& ckpt, const Dataset& data) {
  if (data.scheme != ckpt.scheme) {
    throw ValidationError(
        "evaluation data uses a different label scheme than the model");
  }
  std::vector<int> preds, golds;
  preds.reserve(data.posts.size());
  golds.reserve(data.posts.size());

  constexpr std::size_t kChunk = 32;
  std::vector<Encoded> chunk;
  for (std::size_t start = 0; start < data.posts.size(); start += kChunk) {
    const std::size_t stop = std::min(start + kChunk, data.posts.size());
    chunk.clear();
    for (std::size_t i = start; i < stop; ++i) {
      const Post& post = data.posts[i];
      const std::string cleaned = clean_for_model(post.text, post.language);
      chunk.push_back(encode(cleaned, ckpt.vocab, ckpt.spec.max_len));
      golds.push_back(post.label.index);
    }
    const std::vector<int> batch_preds = predict(ckpt.params, ckpt.spec, chunk);
    preds.insert(preds.end(), batch_preds.begin(), batch_preds.end());
  }

  const ConfusionMatrix m =
      confusion(preds, golds, num_classes(ckpt.scheme));
  return make_eval_report(m, ckpt.scheme);
}

// Seed-sweep aggregates. Entries are normalized by sorting on the seed so
// the report is independent of the order seeds were supplied in.
struct SeedSweepReport {
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_macro_f1;
  double mean = 0.0;
  double stddev = 0.0;      // sample standard deviation
  double spread = 0.0;      // max - min
  double spread_pct = 0.0;  // spread as percent of the mean
};

inline SeedSweepReport aggregate_sweep(
    std::vector<std::pair<std::uint64_t, double>> results) {
  if (results.size() < 2) {
    throw ValidationError("seed sweep needs at least 2 seeds");
  }
  std::sort(results.begin(), results.end());
  SeedSweepReport r;
  double sum = 0.0, mn = results[0].second, mx = results[0].second;
  for (const auto& [seed, f1] : results) {
    r.seeds.push_back(seed);
    r.per_seed_macro_f1.push_back(f1);
    sum += f1;
    mn = std::min(mn, f1);
    mx = std::max(mx, f1);
  }
  const double n = static_cast<double>(results.size());
  r.mean = sum / n;
  double ss = 0.0;
  for (const double f1 : r.per_seed_macro_f1) {
    ss += (f1 - r.mean) * (f1 - r.mean);
  }
  r.stddev = std::sqrt(ss / (n - 1.0));
  r.spread = mx - mn;
  r.spread_pct = r.mean > 0.0 ? 100.0 * r.spread / r.mean : 0.0;
  return r;
}

inline nlohmann::json sweep_report_to_json(const SeedSweepReport& r) {
  return nlohmann::json{{"seeds", r.seeds},
                        {"per_seed_macro_f1", r.per_seed_macro_f1},
                        {"mean", r.mean},
                        {"stddev", r.stddev},
                        {"spread", r.spread},
                        {"spread_pct", r.spread_pct}};
}

inline std::string sweep_report_json(const SeedSweepReport& r) {
  return sweep_report_to_json(r).dump(2) + "\n";
}

inline std::string sweep_report_table(const SeedSweepReport& r) {
  std::string out;
  out += "seed                 macro F1\n";
  for (std::size_t i = 0; i < r.seeds.size(); ++i) {
    char line[96];
    std::snprintf(line, sizeof line, "%-20llu %8s\n",
                  static_cast<unsigned long long>(r.seeds[i]),
                  detail::fixed4(r.per_seed_macro_f1[i]).c_str());
    out += line;
  }
  out += "mean     " + detail::fixed4(r.mean) + "\n";
  out += "stddev   " + detail::fixed4(r.stddev) + "\n";
  out += "spread   " + detail::fixed4(r.spread) + " (" +
         detail::fixed4(r.spread_pct) + "% of mean)\n";
  return out;
}

}  // namespace offlang
