// Acceptance gate: one check per shipping criterion, one line of output
// each, nonzero exit if anything fails. Runs on synthetic fixtures; the
// dataset-statistics check engages only when the gated HASOC files are
// available locally.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "offlang/offlang.hpp"
#include "support/synthetic.hpp"
#include "support/testutil.hpp"

using namespace offlang;
using nlohmann::json;

namespace {

int g_failures = 0;

void outcome(bool ok, int n, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", n,
              detail.c_str());
  if (!ok) ++g_failures;
}

void skip(int n, const std::string& detail) {
  std::printf("[SKIP] criterion %2d: %s\n", n, detail.c_str());
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// ---- criterion 1: published class-weight cells ----------------------------

void criterion1() {
  struct Case {
    std::vector<long long> counts;
    std::vector<double> cells;
  };
  // Binary rows in (NOT, HOF) order; the four-class row in canonical
  // (NONE, HATE, OFFN, PRFN) order.
  const std::vector<Case> cases = {
      {{1342, 2501}, {1.4318, 0.7682}},
      {{3161, 1433}, {0.7266, 1.6029}},
      {{1205, 669}, {0.7775, 1.4005}},
      {{1342, 683, 622, 1196}, {0.7159, 1.4066, 1.5446, 0.8033}},
  };
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool ok = true;
  for (const Case& c : cases) {
    ClassCounts counts;
    counts.scheme = c.counts.size() == 2 ? LabelScheme::Binary
                                         : LabelScheme::FourClass;
    counts.counts = c.counts;
    for (const long long n : c.counts) counts.total += n;
    const ClassWeights cw = class_weights(counts);
    for (std::size_t i = 0; i < c.cells.size(); ++i) {
      const double diff = std::abs(display_weight(cw.weights[i]) - c.cells[i]);
      worst = std::max(worst, diff);
      if (diff > 0.00005) ok = false;
    }
  }
  const double secs = elapsed_s(start);
  outcome(ok && secs < 1.0, 1,
          "all 10 published class-weight cells match at 4 decimals (worst "
          "diff " +
              fmt(worst) + ", " + fmt(secs) + "s)");
}

// ---- criterion 2: dataset statistics against the real files ---------------

struct StatsCase {
  std::string file;
  std::string scheme;
  std::string split;
  std::vector<std::pair<std::string, long long>> expect;
};

void criterion2() {
  const char* dir_env = std::getenv("OFFLANG_DATA_DIR");
  const std::string dir = dir_env ? dir_env : "";
  const std::vector<StatsCase> cases = {
      {"hasoc2021_en_train.tsv", "binary", "train",
       {{"NOT", 1342}, {"HOF", 2501}, {"total", 3843}}},
      {"hasoc2021_en_test.tsv", "binary", "test",
       {{"NOT", 483}, {"HOF", 798}, {"total", 1281}}},
      {"hasoc2021_hi_train.tsv", "binary", "train",
       {{"NOT", 3161}, {"HOF", 1433}, {"total", 4594}}},
      {"hasoc2021_hi_test.tsv", "binary", "test",
       {{"NOT", 1027}, {"HOF", 505}, {"total", 1532}}},
      {"hasoc2021_mr_train.tsv", "binary", "train",
       {{"NOT", 1205}, {"HOF", 669}, {"total", 1874}}},
      {"hasoc2021_mr_test.tsv", "binary", "test",
       {{"NOT", 418}, {"HOF", 207}, {"total", 625}}},
      {"hasoc2021_mix_train.tsv", "binary", "train",
       {{"NOT", 2899}, {"HOF", 2841}, {"total", 5740}}},
      {"hasoc2021_mix_test.tsv", "binary", "test",
       {{"NOT", 695}, {"HOF", 653}, {"total", 1348}}},
      {"hasoc2021_en_train.tsv", "four", "train",
       {{"NONE", 1342},
        {"HATE", 683},
        {"OFFN", 622},
        {"PRFN", 1196},
        {"total", 3843}}},
      {"hasoc2021_en_test.tsv", "four", "test",
       {{"NONE", 483},
        {"HATE", 224},
        {"OFFN", 195},
        {"PRFN", 379},
        {"total", 1281}}},
  };

  bool all_present = !dir.empty();
  if (all_present) {
    for (const StatsCase& c : cases) {
      if (!std::filesystem::exists(std::filesystem::path(dir) / c.file)) {
        all_present = false;
        break;
      }
    }
  }
  if (!all_present) {
    skip(2,
         "gated HASOC files not found; point OFFLANG_DATA_DIR at "
         "hasoc2021_{en,hi,mr,mix}_{train,test}.tsv to check every "
         "published count");
    return;
  }

  testsupport::TempDir tmp("accept-stats");
  bool ok = true;
  std::string bad;
  for (const StatsCase& c : cases) {
    const auto manifest = tmp.file("m.json");
    const auto r = testsupport::run_process(
        OFFLANG_CLI_PATH,
        "stats --data " + c.file + " --scheme " + c.scheme + " --split " +
            c.split + " --manifest " + manifest.string(),
        tmp);
    if (r.exit_code != 0) {
      ok = false;
      bad = c.file + " exited " + std::to_string(r.exit_code);
      break;
    }
    const json m = json::parse(testsupport::slurp(manifest));
    for (const auto& [key, want] : c.expect) {
      const long long got = m["counts"][key].get<long long>();
      if (got != want) {
        ok = false;
        bad = c.file + " " + key + " = " + std::to_string(got) +
              ", published " + std::to_string(want);
        break;
      }
    }
    if (!ok) break;
  }
  outcome(ok, 2,
          ok ? "every published count in both statistics tables reproduced "
               "exactly from the local HASOC files"
             : "dataset statistics mismatch: " + bad);
}

// ---- criterion 3: loss worked examples and the binary formula -------------

void criterion3() {
  bool ok = true;
  Matrix perfect(1, 2);
  perfect(0, 1) = 1.0;
  ok &= std::abs(weighted_ce_loss(perfect, {1}, {1.0, 1.0}) - 0.0) <= 1e-9;

  Matrix half(1, 2);
  half(0, 0) = 0.5;
  half(0, 1) = 0.5;
  ok &= std::abs(weighted_ce_loss(half, {1}, {1.0, 1.0}) - std::log(2.0)) <=
        1e-9;
  ok &= std::abs(weighted_ce_loss(half, {1}, {1.4318, 0.7682}) -
                 0.7682 * std::log(2.0)) <= 1e-9;

  double worst = 0.0;
  Rng rng = Rng::stream(33, 0x616363);
  for (int i = 0; i < 1000; ++i) {
    const double s = std::min(1.0 - 1e-9, std::max(1e-9, rng.next_real()));
    const int t = static_cast<int>(rng.next_below(2));
    Matrix probs(1, 2);
    probs(0, 0) = 1.0 - s;
    probs(0, 1) = s;
    const double formula =
        -(t * std::log(s) + (1 - t) * std::log(1.0 - s));
    worst = std::max(
        worst,
        std::abs(weighted_ce_loss(probs, {t}, {1.0, 1.0}) - formula));
  }
  ok &= worst <= 1e-12;
  outcome(ok, 3,
          "three worked loss examples match to 1e-9; 1000 random pairs match "
          "the binary formula (worst diff " +
              fmt(worst) + ")");
}

// ---- criterion 4: gradients against finite differences --------------------

double fd_worst_rel_err(ModelParams& p, const ClassifierSpec& spec,
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
    for (std::size_t j = 0; j < pd.size(); ++j) {
      const double save = pd[j];
      pd[j] = save + h;
      const double lp =
          weighted_ce_loss(forward(p, spec, batch).probs, labels, weights);
      pd[j] = save - h;
      const double lm =
          weighted_ce_loss(forward(p, spec, batch).probs, labels, weights);
      pd[j] = save;
      const double fd = (lp - lm) / (2.0 * h);
      const double rel = std::abs(fd - gd[j]) /
                         std::max({std::abs(fd), std::abs(gd[j]), 1e-6});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

void criterion4() {
  const auto start = std::chrono::steady_clock::now();
  ClassifierSpec spec;
  spec.d_model = 8;
  spec.num_heads = 2;
  spec.num_layers = 1;
  spec.max_len = 8;
  spec.num_classes = 2;
  spec.ffn_mult = 2;
  spec.dropout = 0.0;

  double worst = 0.0;
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    Rng rng = Rng::stream(700 + draw, 0x616363);
    ModelParams p = init_params(spec, 12, 900 + draw);
    std::vector<Encoded> batch;
    const std::vector<std::size_t> lens = {8, 2 + rng.next_below(5), 2};
    for (const std::size_t len : lens) {
      Encoded e;
      e.ids.assign(8, Vocab::kPad);
      e.mask.assign(8, 0);
      e.ids[0] = Vocab::kCls;
      e.mask[0] = 1;
      for (std::size_t i = 1; i < len; ++i) {
        e.ids[i] = 4 + static_cast<int>(rng.next_below(8));
        e.mask[i] = 1;
      }
      batch.push_back(std::move(e));
    }
    std::vector<int> labels;
    for (int b = 0; b < 3; ++b) {
      labels.push_back(static_cast<int>(rng.next_below(2)));
    }
    worst = std::max(
        worst, fd_worst_rel_err(p, spec, batch, labels, {1.3, 0.7}));
  }
  const double secs = elapsed_s(start);
  outcome(worst < 1e-4 && secs < 60.0, 4,
          "analytic gradients vs central differences over 20 draws: worst "
          "relative error " +
              fmt(worst) + " (" + fmt(secs) + "s)");
}

// ---- criterion 5: desk-scale learning on the separable corpus -------------

void criterion5() {
  const auto start = std::chrono::steady_clock::now();
  const Dataset data = testsupport::separable_corpus(200, 42);
  const ClassifierSpec spec;  // stock architecture
  const TrainConfig cfg;      // stock training settings, 20 epochs
  const TrainResult r = train(data, spec, cfg);
  double best = 0.0;
  for (const double f1 : r.history.train_macro_f1) best = std::max(best, f1);
  const double secs = elapsed_s(start);
  outcome(best >= 0.95 && secs < 120.0, 5,
          "stock training on the 200-sample separable corpus reaches train "
          "macro F1 " +
              fmt(best) + " within 20 epochs (" + fmt(secs) + "s)");
}

// ---- criterion 6: class weighting helps the minority class ----------------

void criterion6() {
  const Dataset data = testsupport::imbalanced_corpus(200, 7);
  ClassifierSpec spec;
  spec.d_model = 16;
  spec.num_heads = 2;
  spec.num_layers = 1;
  spec.max_len = 16;
  spec.ffn_mult = 2;

  int wins = 0;
  std::string detail;
  for (const std::uint64_t seed : {101ull, 102ull, 103ull, 104ull, 105ull}) {
    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 16;
    cfg.seed = seed;

    TrainConfig weighted = cfg;
    weighted.weighted = true;

    const double plain_recall =
        evaluate(train(data, spec, cfg).checkpoint, data).per_class[1].recall;
    const double weighted_recall =
        evaluate(train(data, spec, weighted).checkpoint, data)
            .per_class[1]
            .recall;
    if (weighted_recall >= plain_recall) ++wins;
    detail += (detail.empty() ? "" : ", ") + fmt(weighted_recall) + ">=" +
              fmt(plain_recall);
  }
  outcome(wins >= 4, 6,
          "weighted training matches or beats unweighted minority recall in " +
              std::to_string(wins) + "/5 seeds (" + detail + ")");
}

// ---- criterion 7: macro F1 against a brute-force oracle -------------------

double oracle_macro_f1(const std::vector<int>& golds,
                       const std::vector<int>& preds, int classes) {
  double sum = 0.0;
  for (int c = 0; c < classes; ++c) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      if (preds[i] == c && golds[i] == c) {
        ++tp;
      } else if (preds[i] == c) {
        ++fp;
      } else if (golds[i] == c) {
        ++fn;
      }
    }
    const double precision =
        tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                    : 0.0;
    const double recall =
        tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                    : 0.0;
    const double denom = precision + recall;
    sum += denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
  }
  return sum / static_cast<double>(classes);
}

void criterion7() {
  Rng rng = Rng::stream(44, 0x616363);
  bool ok = true;
  for (int trial = 0; trial < 500 && ok; ++trial) {
    const int classes = 2 + static_cast<int>(rng.next_below(3));
    const std::size_t n = 1 + rng.next_below(20);
    std::vector<int> golds, preds;
    for (std::size_t i = 0; i < n; ++i) {
      golds.push_back(static_cast<int>(rng.next_below(classes)));
      preds.push_back(static_cast<int>(rng.next_below(classes)));
    }
    ok &= macro_f1(confusion(preds, golds, classes)) ==
          oracle_macro_f1(golds, preds, classes);
  }
  outcome(ok, 7,
          "macro F1 equals the brute-force per-class oracle exactly on 500 "
          "random confusion matrices");
}

// ---- criterion 8: byte-level determinism -----------------------------------

void criterion8() {
  const Dataset data = testsupport::separable_corpus(40, 3);
  const Dataset held = testsupport::separable_corpus(40, 4);
  ClassifierSpec spec;
  spec.d_model = 16;
  spec.num_heads = 2;
  spec.num_layers = 1;
  spec.max_len = 12;
  spec.ffn_mult = 2;
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 8;
  cfg.seed = 17;

  const TrainResult a = train(data, spec, cfg);
  const TrainResult b = train(data, spec, cfg);
  const bool ckpt_same =
      serialize_checkpoint(a.checkpoint) == serialize_checkpoint(b.checkpoint);
  const bool report_same = eval_report_json(evaluate(a.checkpoint, held)) ==
                           eval_report_json(evaluate(b.checkpoint, held));

  TrainConfig sweep_cfg = cfg;
  sweep_cfg.epochs = 2;
  const std::string s1 =
      sweep_report_json(seed_sweep(data, held, spec, sweep_cfg, {5, 9}));
  const std::string s2 =
      sweep_report_json(seed_sweep(data, held, spec, sweep_cfg, {9, 5}));
  const bool sweep_same = s1 == s2;

  outcome(ckpt_same && report_same && sweep_same, 8,
          "identical data, settings, and seed give byte-identical "
          "checkpoints, eval reports, and sweep reports");
}

// ---- criterion 9: preprocessing idempotence --------------------------------

void criterion9() {
  const PreprocessConfig en;
  const auto hi = PreprocessConfig::for_language(Language::Hindi);
  const auto mr = PreprocessConfig::for_language(Language::Marathi);
  const std::vector<const PreprocessConfig*> cfgs = {&en, &hi, &mr};

  const std::vector<char32_t> pool = {
      U'a',      U'e',      U'z',        U'Q',          U'5',
      U'@',      U'#',      U'$',        U'%',          U'.',
      U',',      U'?',      U'!',        U';',          U'~',
      U' ',      U'\t',     U'\n',       U'\r',         U':',
      U'/',      U'_',      U'-',        U'(',          U')',
      U'क', U'ह', U'ा',   U'।',     U'॥',
      U'|',      U'\u200D', U'\uFE0F',   U'\U0001F600', U'\U0001F62D',
      U'\U0001F1EE', U'\U0001F1F3', U'\U0001F3FD', U'é', U'中'};
  const std::vector<std::string> seeds = {"http://", "https://", "www.",
                                          "@name", "t.co/x", "[CTX]"};

  Rng rng = Rng::stream(55, 0x616363);
  bool ok = true;
  for (int i = 0; i < 10000 && ok; ++i) {
    std::string s;
    const std::size_t len = rng.next_below(40);
    for (std::size_t k = 0; k < len; ++k) {
      uni::append(s, pool[rng.next_below(pool.size())]);
    }
    if (rng.next_below(3) == 0) {
      s.insert(rng.next_below(s.size() + 1),
               seeds[rng.next_below(seeds.size())]);
    }
    const PreprocessConfig& cfg = *cfgs[i % cfgs.size()];
    const std::string once = preprocess(s, cfg);
    ok &= preprocess(once, cfg) == once;
  }

  const bool composed =
      preprocess("@JohnDoe you are awful https://t.co/x \U0001F600 #shame",
                 en) == "@user you are awful #shame";
  outcome(ok && composed, 9,
          "preprocessing is idempotent on 10000 random Unicode strings and "
          "reproduces the composed example exactly");
}

// ---- criterion 10: sweep arithmetic, not published scores ------------------

void criterion10() {
  const SeedSweepReport r =
      aggregate_sweep({{1, 0.70}, {2, 0.72}, {3, 0.71}});
  bool ok = std::abs(r.mean - 0.71) <= 1e-12;
  ok &= std::abs(r.spread - 0.02) <= 1e-12;
  ok &= std::abs(r.stddev - 0.01) <= 1e-12;

  const SeedSweepReport same = aggregate_sweep({{4, 0.5}, {6, 0.5}});
  ok &= same.spread == 0.0;

  const SeedSweepReport x = aggregate_sweep({{3, 0.9}, {1, 0.7}, {2, 0.8}});
  const SeedSweepReport y = aggregate_sweep({{1, 0.7}, {2, 0.8}, {3, 0.9}});
  ok &= sweep_report_json(x) == sweep_report_json(y);

  outcome(ok, 10,
          "sweep mean/stddev/spread arithmetic is exact to 1e-12; published "
          "macro-F1 levels (0.80 English, 0.78 Hindi, 0.71 code-mixed) need "
          "pretrained multilingual encoders, GPUs, and the gated data, and "
          "are out of scope at desk scale by intent");
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  if (g_failures > 0) {
    std::printf("%d criterion check(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria satisfied\n");
  return 0;
}
