// offlang: end-to-end command line for the offensive-language toolkit.
// Subcommands cover dataset statistics, class weights, preprocessing,
// training, evaluation, and multi-seed experiments.

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "offlang/offlang.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Input paths are used as given when they exist; otherwise relative paths
// are retried under OFFLANG_DATA_DIR before the opener reports the miss.
std::string resolve_input(const std::string& path) {
  if (path.empty()) return path;
  std::error_code ec;
  const fs::path p(path);
  if (fs::exists(p, ec)) return path;
  if (p.is_relative()) {
    if (const char* root = std::getenv("OFFLANG_DATA_DIR")) {
      const fs::path joined = fs::path(root) / p;
      if (fs::exists(joined, ec)) return joined.string();
    }
  }
  return path;
}

std::string now_utc_iso8601() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Optional JSON config file. Flags always win: a key is consulted only
// when its flag was not given on the command line.
class Overlay {
 public:
  explicit Overlay(CLI::App* sub) : sub_(sub) {}

  void load(const std::string& path) {
    const std::string raw = offlang::io::read_file(path);
    try {
      j_ = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw offlang::ParseError(path + ": config is not valid JSON: " +
                                e.what());
    }
    if (!j_.is_object()) {
      throw offlang::ParseError(path + ": config must be a JSON object");
    }
    loaded_ = true;
  }

  template <typename T>
  void merge(const char* flag, const char* key, T& value) {
    if (!loaded_ || sub_->count(flag) > 0 || !j_.contains(key)) return;
    try {
      value = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw offlang::ParseError(std::string("config key '") + key +
                                "' has the wrong type");
    }
  }

 private:
  CLI::App* sub_;
  json j_;
  bool loaded_ = false;
};

offlang::LabelScheme parse_scheme_arg(const std::string& s) {
  if (const auto scheme = offlang::try_parse_scheme(s)) return *scheme;
  throw offlang::ValidationError("unknown scheme '" + s +
                                 "' (expected binary or four)");
}

offlang::Language parse_lang_arg(const std::string& s) {
  if (const auto lang = offlang::try_parse_language(s)) return *lang;
  throw offlang::ValidationError("unknown language '" + s +
                                 "' (expected en, hi, mr, or mix)");
}

offlang::Split parse_split_arg(const std::string& s) {
  if (s == "train") return offlang::Split::Train;
  if (s == "test") return offlang::Split::Test;
  throw offlang::ValidationError("unknown split '" + s +
                                 "' (expected train or test)");
}

offlang::ModelKind parse_kind_arg(const std::string& s) {
  if (s == "mini_transformer") return offlang::ModelKind::MiniTransformer;
  if (s == "linear_bow") return offlang::ModelKind::LinearBoW;
  throw offlang::ValidationError(
      "unknown model kind '" + s +
      "' (expected mini_transformer or linear_bow)");
}

// One manifest per run: what ran, with which resolved settings, over which
// input bytes, producing which files.
void write_manifest(const std::string& manifest_path,
                    const std::string& subcommand, const json& config,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs,
                    const json& extra = json::object()) {
  json inputs_json = json::object();
  for (const std::string& in : inputs) {
    inputs_json[in] = offlang::io::fnv1a64_hex(offlang::io::read_file(in));
  }
  json m{{"subcommand", subcommand},
         {"config", config},
         {"inputs", std::move(inputs_json)},
         {"outputs", outputs},
         {"timestamp", now_utc_iso8601()}};
  for (const auto& [key, value] : extra.items()) m[key] = value;
  offlang::io::write_file_atomic(manifest_path, m.dump(2) + "\n");
}

// Model-architecture flags shared by train and experiment.
struct ModelFlags {
  std::string kind = "mini_transformer";
  int d_model = 64;
  int num_heads = 2;
  int num_layers = 2;
  int max_len = 64;
  int ffn_mult = 4;
  double dropout = 0.1;
};

void add_model_flags(CLI::App* sub, ModelFlags& f) {
  sub->add_option("--kind", f.kind,
                  "model kind: mini_transformer or linear_bow");
  sub->add_option("--d-model", f.d_model, "embedding width");
  sub->add_option("--heads", f.num_heads, "attention heads");
  sub->add_option("--layers", f.num_layers, "encoder layers");
  sub->add_option("--max-len", f.max_len, "sequence length budget");
  sub->add_option("--ffn-mult", f.ffn_mult, "feed-forward width multiplier");
  sub->add_option("--dropout", f.dropout, "dropout rate in [0,1)");
}

void merge_model_flags(Overlay& ov, ModelFlags& f) {
  ov.merge("--kind", "kind", f.kind);
  ov.merge("--d-model", "d_model", f.d_model);
  ov.merge("--heads", "num_heads", f.num_heads);
  ov.merge("--layers", "num_layers", f.num_layers);
  ov.merge("--max-len", "max_len", f.max_len);
  ov.merge("--ffn-mult", "ffn_mult", f.ffn_mult);
  ov.merge("--dropout", "dropout", f.dropout);
}

offlang::ClassifierSpec build_spec(const ModelFlags& f,
                                   offlang::LabelScheme scheme) {
  offlang::ClassifierSpec spec;
  spec.kind = parse_kind_arg(f.kind);
  spec.d_model = f.d_model;
  spec.num_heads = f.num_heads;
  spec.num_layers = f.num_layers;
  spec.max_len = f.max_len;
  spec.num_classes = offlang::num_classes(scheme);
  spec.ffn_mult = f.ffn_mult;
  spec.dropout = f.dropout;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw offlang::ValidationError(e.what());
  }
  return spec;
}

json spec_to_json(const offlang::ClassifierSpec& spec) {
  return json{{"kind", spec.kind == offlang::ModelKind::MiniTransformer
                           ? "mini_transformer"
                           : "linear_bow"},
              {"d_model", spec.d_model},
              {"num_heads", spec.num_heads},
              {"num_layers", spec.num_layers},
              {"max_len", spec.max_len},
              {"num_classes", spec.num_classes},
              {"ffn_mult", spec.ffn_mult},
              {"dropout", spec.dropout}};
}

// Training-loop flags shared by train and experiment.
struct TrainFlags {
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 1e-3;
  bool weighted = false;
  std::uint64_t seed = 1;
  bool no_shuffle = false;
  std::uint64_t vocab_size = 30000;
};

void add_train_flags(CLI::App* sub, TrainFlags& f) {
  sub->add_option("--epochs", f.epochs, "training epochs");
  sub->add_option("--batch-size", f.batch_size, "minibatch size");
  sub->add_option("--lr", f.learning_rate, "Adam learning rate");
  sub->add_flag("--weighted", f.weighted, "use normalized class weights");
  sub->add_option("--seed", f.seed, "RNG seed");
  sub->add_flag("--no-shuffle", f.no_shuffle, "disable the per-epoch shuffle");
  sub->add_option("--vocab-size", f.vocab_size, "vocabulary size cap");
}

void merge_train_flags(Overlay& ov, TrainFlags& f) {
  ov.merge("--epochs", "epochs", f.epochs);
  ov.merge("--batch-size", "batch_size", f.batch_size);
  ov.merge("--lr", "learning_rate", f.learning_rate);
  ov.merge("--weighted", "weighted", f.weighted);
  ov.merge("--seed", "seed", f.seed);
  ov.merge("--vocab-size", "vocab_max_size", f.vocab_size);
  bool shuffle = !f.no_shuffle;
  ov.merge("--no-shuffle", "shuffle", shuffle);
  f.no_shuffle = !shuffle;
}

offlang::TrainConfig build_train_cfg(const TrainFlags& f) {
  offlang::TrainConfig cfg;
  cfg.epochs = f.epochs;
  cfg.batch_size = f.batch_size;
  cfg.learning_rate = f.learning_rate;
  cfg.weighted = f.weighted;
  cfg.seed = f.seed;
  cfg.shuffle = !f.no_shuffle;
  cfg.vocab_max_size = static_cast<std::size_t>(f.vocab_size);
  cfg.validate();
  return cfg;
}

json train_cfg_to_json(const offlang::TrainConfig& cfg) {
  return json{{"epochs", cfg.epochs},
              {"batch_size", cfg.batch_size},
              {"learning_rate", cfg.learning_rate},
              {"weighted", cfg.weighted},
              {"seed", cfg.seed},
              {"shuffle", cfg.shuffle},
              {"early_stopping", false},
              {"vocab_max_size", cfg.vocab_max_size}};
}

std::string stats_table(const offlang::ClassCounts& counts) {
  const auto names = offlang::class_names(counts.scheme);
  std::string out = "class   count\n";
  for (std::size_t c = 0; c < counts.counts.size(); ++c) {
    char line[64];
    std::snprintf(line, sizeof line, "%-6s %6lld\n",
                  std::string(names[c]).c_str(),
                  static_cast<long long>(counts.counts[c]));
    out += line;
  }
  char total[64];
  std::snprintf(total, sizeof total, "%-6s %6lld\n", "total",
                static_cast<long long>(counts.total));
  out += total;
  return out;
}

// ---- stats ----------------------------------------------------------------

struct StatsArgs {
  std::string data, scheme = "binary", lang = "en", split = "train";
  std::string config, manifest;
};

void run_stats(CLI::App* sub, StatsArgs& a) {
  Overlay ov(sub);
  if (!a.config.empty()) ov.load(resolve_input(a.config));
  ov.merge("--data", "data", a.data);
  ov.merge("--scheme", "scheme", a.scheme);
  ov.merge("--lang", "lang", a.lang);
  ov.merge("--split", "split", a.split);
  if (a.data.empty()) {
    throw offlang::ValidationError("stats: --data is required");
  }

  const std::string data_path = resolve_input(a.data);
  const auto scheme = parse_scheme_arg(a.scheme);
  const auto dataset = offlang::load_dataset(data_path, scheme,
                                             parse_split_arg(a.split),
                                             parse_lang_arg(a.lang));
  const auto counts = offlang::dataset_stats(dataset);
  std::cout << stats_table(counts);

  const json config{{"data", data_path},
                    {"scheme", a.scheme},
                    {"lang", a.lang},
                    {"split", a.split}};
  json counts_json = json::object();
  const auto names = offlang::class_names(scheme);
  for (std::size_t c = 0; c < counts.counts.size(); ++c) {
    counts_json[std::string(names[c])] = counts.counts[c];
  }
  counts_json["total"] = counts.total;
  const std::string manifest =
      a.manifest.empty() ? "stats-manifest.json" : a.manifest;
  write_manifest(manifest, "stats", config, {data_path}, {},
                 json{{"counts", counts_json}});
}

// ---- weights --------------------------------------------------------------

struct WeightsArgs {
  std::string data, scheme = "binary", lang = "en", split = "train";
  std::string config, manifest;
};

void run_weights(CLI::App* sub, WeightsArgs& a) {
  Overlay ov(sub);
  if (!a.config.empty()) ov.load(resolve_input(a.config));
  ov.merge("--data", "data", a.data);
  ov.merge("--scheme", "scheme", a.scheme);
  ov.merge("--lang", "lang", a.lang);
  ov.merge("--split", "split", a.split);
  if (a.data.empty()) {
    throw offlang::ValidationError("weights: --data is required");
  }

  const std::string data_path = resolve_input(a.data);
  const auto scheme = parse_scheme_arg(a.scheme);
  const auto dataset = offlang::load_dataset(data_path, scheme,
                                             parse_split_arg(a.split),
                                             parse_lang_arg(a.lang));
  const auto weights = offlang::class_weights(offlang::dataset_stats(dataset));
  std::cout << offlang::format_weight_table(weights);
  std::string summary = "weights:";
  for (std::size_t c = 0; c < weights.weights.size(); ++c) {
    summary += (c == 0 ? " " : " / ");
    summary += offlang::format_weight(weights.weights[c]);
  }
  std::cout << summary << "\n";

  const json config{{"data", data_path},
                    {"scheme", a.scheme},
                    {"lang", a.lang},
                    {"split", a.split}};
  json weights_json = json::object();
  const auto names = offlang::class_names(scheme);
  for (std::size_t c = 0; c < weights.weights.size(); ++c) {
    weights_json[std::string(names[c])] =
        offlang::format_weight(weights.weights[c]);
  }
  const std::string manifest =
      a.manifest.empty() ? "weights-manifest.json" : a.manifest;
  write_manifest(manifest, "weights", config, {data_path}, {},
                 json{{"weights", weights_json}});
}

// ---- preprocess -----------------------------------------------------------

struct PreprocessArgs {
  std::string in, out, lang = "en", separator = "[CTX]";
  bool flatten = false;
  std::string config, manifest;
};

void run_preprocess(CLI::App* sub, PreprocessArgs& a) {
  Overlay ov(sub);
  if (!a.config.empty()) ov.load(resolve_input(a.config));
  ov.merge("--in", "in", a.in);
  ov.merge("--out", "out", a.out);
  ov.merge("--lang", "lang", a.lang);
  ov.merge("--separator", "separator", a.separator);
  ov.merge("--flatten", "flatten", a.flatten);
  if (a.in.empty() || a.out.empty()) {
    throw offlang::ValidationError("preprocess: --in and --out are required");
  }

  const std::string in_path = resolve_input(a.in);
  const auto lang = parse_lang_arg(a.lang);
  std::string out_text;

  if (a.flatten) {
    // Conversation JSON in, one row per node out, context joined by the
    // separator token.
    const auto trees = offlang::load_conversations(in_path);
    out_text = "text_id\ttext\ttask_1\n";
    for (const auto& tree : trees) {
      for (const offlang::Post& post :
           offlang::flatten_conversation(tree, a.separator, lang)) {
        out_text += post.id;
        out_text += '\t';
        out_text +=
            offlang::preprocess_with_separator(
                post.text, offlang::PreprocessConfig::for_language(lang),
                a.separator);
        out_text += '\t';
        out_text += offlang::label_name(post.label);
        out_text += '\n';
      }
    }
  } else {
    // Flat TSV in, same columns out with the text cell cleaned.
    const std::string raw = offlang::io::read_file(in_path);
    const auto lines = offlang::detail::split_lines(raw);
    if (lines.empty()) {
      throw offlang::SchemaError(in_path + ": empty file, expected a header");
    }
    const auto header = offlang::detail::split_tabs(lines[0]);
    std::size_t text_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "text") text_col = i;
    }
    if (text_col == header.size()) {
      throw offlang::SchemaError(in_path + ": missing column 'text'");
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i > 0) out_text += '\t';
      out_text += header[i];
    }
    out_text += '\n';
    for (std::size_t row = 1; row < lines.size(); ++row) {
      if (lines[row].empty()) continue;
      const auto fields = offlang::detail::split_tabs(lines[row]);
      if (fields.size() != header.size()) {
        throw offlang::ParseError(in_path + ": row " + std::to_string(row + 1) +
                                  ": expected " +
                                  std::to_string(header.size()) +
                                  " fields, found " +
                                  std::to_string(fields.size()));
      }
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out_text += '\t';
        if (i == text_col) {
          out_text += offlang::preprocess_with_separator(
              fields[i], offlang::PreprocessConfig::for_language(lang),
              a.separator);
        } else {
          out_text += fields[i];
        }
      }
      out_text += '\n';
    }
  }

  offlang::io::write_file_atomic(a.out, out_text);
  std::cout << "wrote " << a.out << "\n";

  const json config{{"in", in_path},
                    {"out", a.out},
                    {"lang", a.lang},
                    {"separator", a.separator},
                    {"flatten", a.flatten}};
  const std::string manifest =
      a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  write_manifest(manifest, "preprocess", config, {in_path}, {a.out});
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string train, scheme = "binary", lang = "en", out = "model.olk1";
  std::string spec_file;
  ModelFlags model;
  TrainFlags tf;
  std::string config, manifest;
};

void run_train(CLI::App* sub, TrainArgs& a) {
  Overlay ov(sub);
  if (!a.config.empty()) ov.load(resolve_input(a.config));
  ov.merge("--train", "train", a.train);
  ov.merge("--scheme", "scheme", a.scheme);
  ov.merge("--lang", "lang", a.lang);
  ov.merge("--out", "out", a.out);
  ov.merge("--spec", "spec", a.spec_file);
  merge_model_flags(ov, a.model);
  merge_train_flags(ov, a.tf);
  if (!a.spec_file.empty()) {
    // Architecture file: lower precedence than explicit model flags.
    Overlay spec_ov(sub);
    spec_ov.load(resolve_input(a.spec_file));
    merge_model_flags(spec_ov, a.model);
  }
  if (a.train.empty()) {
    throw offlang::ValidationError("train: --train is required");
  }

  const std::string train_path = resolve_input(a.train);
  const auto scheme = parse_scheme_arg(a.scheme);
  const auto spec = build_spec(a.model, scheme);
  const auto cfg = build_train_cfg(a.tf);
  const auto dataset = offlang::load_dataset(train_path, scheme,
                                             offlang::Split::Train,
                                             parse_lang_arg(a.lang));

  const offlang::TrainResult result = offlang::train(dataset, spec, cfg);
  for (std::size_t e = 0; e < result.history.loss.size(); ++e) {
    std::printf("epoch %zu/%d loss %.4f train-macro-f1 %.4f\n", e + 1,
                cfg.epochs, result.history.loss[e],
                result.history.train_macro_f1[e]);
  }
  offlang::save_checkpoint(result.checkpoint, a.out);
  std::printf("saved %s (%.2fs)\n", a.out.c_str(),
              result.history.wall_seconds);

  const offlang::EvalReport final_report =
      offlang::evaluate(result.checkpoint, dataset);
  json config_json{{"train", train_path},
                   {"scheme", a.scheme},
                   {"lang", a.lang},
                   {"out", a.out},
                   {"spec", spec_to_json(spec)}};
  config_json.update(train_cfg_to_json(cfg));
  const std::string manifest =
      a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  std::vector<std::string> inputs{train_path};
  if (!a.config.empty()) inputs.push_back(resolve_input(a.config));
  if (!a.spec_file.empty()) inputs.push_back(resolve_input(a.spec_file));
  write_manifest(
      manifest, "train", config_json, inputs, {a.out},
      json{{"final_train_metrics", offlang::eval_report_to_json(final_report)},
           {"history",
            json{{"loss", result.history.loss},
                 {"train_macro_f1", result.history.train_macro_f1},
                 {"wall_seconds", result.history.wall_seconds}}}});
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string model, test, lang, out = "eval-report.json";
  std::string config, manifest;
};

void run_eval(CLI::App* sub, EvalArgs& a) {
  Overlay ov(sub);
  if (!a.config.empty()) ov.load(resolve_input(a.config));
  ov.merge("--model", "model", a.model);
  ov.merge("--test", "test", a.test);
  ov.merge("--lang", "lang", a.lang);
  ov.merge("--out", "out", a.out);
  if (a.model.empty() || a.test.empty()) {
    throw offlang::ValidationError("eval: --model and --test are required");
  }

  const std::string model_path = resolve_input(a.model);
  const std::string test_path = resolve_input(a.test);
  const offlang::Checkpoint ckpt = offlang::load_checkpoint(model_path);
  const offlang::Language lang =
      a.lang.empty() ? ckpt.language : parse_lang_arg(a.lang);
  const auto dataset = offlang::load_dataset(test_path, ckpt.scheme,
                                             offlang::Split::Test, lang);
  const offlang::EvalReport report = offlang::evaluate(ckpt, dataset);
  offlang::io::write_file_atomic(a.out, offlang::eval_report_json(report));
  std::cout << offlang::eval_report_table(report);
  std::cout << "wrote " << a.out << "\n";

  const json config{{"model", model_path},
                    {"test", test_path},
                    {"lang", std::string(offlang::language_name(lang))},
                    {"out", a.out}};
  const std::string manifest =
      a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  write_manifest(manifest, "eval", config, {model_path, test_path}, {a.out},
                 json{{"macro_f1", report.macro_f1}});
}

// ---- experiment -----------------------------------------------------------

struct ExperimentArgs {
  std::string train, test, scheme = "binary", lang = "en";
  std::string out = "sweep-report.json";
  std::vector<std::uint64_t> seeds;
  ModelFlags model;
  TrainFlags tf;
  std::string config, manifest;
};

void run_experiment(CLI::App* sub, ExperimentArgs& a) {
  Overlay ov(sub);
  if (!a.config.empty()) ov.load(resolve_input(a.config));
  ov.merge("--train", "train", a.train);
  ov.merge("--test", "test", a.test);
  ov.merge("--scheme", "scheme", a.scheme);
  ov.merge("--lang", "lang", a.lang);
  ov.merge("--out", "out", a.out);
  ov.merge("--seeds", "seeds", a.seeds);
  merge_model_flags(ov, a.model);
  merge_train_flags(ov, a.tf);
  if (a.train.empty() || a.test.empty()) {
    throw offlang::ValidationError(
        "experiment: --train and --test are required");
  }
  if (a.seeds.size() < 2) {
    throw offlang::ValidationError("experiment: need at least 2 seeds");
  }

  const std::string train_path = resolve_input(a.train);
  const std::string test_path = resolve_input(a.test);
  const auto scheme = parse_scheme_arg(a.scheme);
  const auto lang = parse_lang_arg(a.lang);
  const auto spec = build_spec(a.model, scheme);
  const auto cfg = build_train_cfg(a.tf);
  const auto train_data =
      offlang::load_dataset(train_path, scheme, offlang::Split::Train, lang);
  const auto test_data =
      offlang::load_dataset(test_path, scheme, offlang::Split::Test, lang);

  const offlang::SeedSweepReport report =
      offlang::seed_sweep(train_data, test_data, spec, cfg, a.seeds);
  offlang::io::write_file_atomic(a.out, offlang::sweep_report_json(report));
  std::cout << offlang::sweep_report_table(report);
  std::cout << "wrote " << a.out << "\n";

  json config_json{{"train", train_path}, {"test", test_path},
                   {"scheme", a.scheme},  {"lang", a.lang},
                   {"out", a.out},        {"seeds", a.seeds},
                   {"spec", spec_to_json(spec)}};
  config_json.update(train_cfg_to_json(cfg));
  const std::string manifest =
      a.manifest.empty() ? a.out + ".manifest.json" : a.manifest;
  write_manifest(manifest, "experiment", config_json, {train_path, test_path},
                 {a.out},
                 json{{"mean", report.mean},
                      {"stddev", report.stddev},
                      {"spread", report.spread},
                      {"spread_pct", report.spread_pct}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"offensive and hate speech classification toolkit"};
  app.require_subcommand(1);

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "class counts for a dataset");
  stats->add_option("--data", stats_args.data, "TSV dataset path");
  stats->add_option("--scheme", stats_args.scheme, "binary or four");
  stats->add_option("--lang", stats_args.lang, "en, hi, mr, or mix");
  stats->add_option("--split", stats_args.split, "train or test");
  stats->add_option("--config", stats_args.config, "JSON config file");
  stats->add_option("--manifest", stats_args.manifest, "manifest path");
  stats->callback([&] { run_stats(stats, stats_args); });

  WeightsArgs weights_args;
  auto* weights =
      app.add_subcommand("weights", "normalized class weights for a dataset");
  weights->add_option("--data", weights_args.data, "TSV dataset path");
  weights->add_option("--scheme", weights_args.scheme, "binary or four");
  weights->add_option("--lang", weights_args.lang, "en, hi, mr, or mix");
  weights->add_option("--split", weights_args.split, "train or test");
  weights->add_option("--config", weights_args.config, "JSON config file");
  weights->add_option("--manifest", weights_args.manifest, "manifest path");
  weights->callback([&] { run_weights(weights, weights_args); });

  PreprocessArgs pre_args;
  auto* pre = app.add_subcommand("preprocess", "clean a dataset's text");
  pre->add_option("--in", pre_args.in, "input TSV (or conversation JSON)");
  pre->add_option("--out", pre_args.out, "output TSV path");
  pre->add_option("--lang", pre_args.lang, "en, hi, mr, or mix");
  pre->add_flag("--flatten", pre_args.flatten,
                "input is conversation JSON; emit one row per node");
  pre->add_option("--separator", pre_args.separator, "context separator token");
  pre->add_option("--config", pre_args.config, "JSON config file");
  pre->add_option("--manifest", pre_args.manifest, "manifest path");
  pre->callback([&] { run_preprocess(pre, pre_args); });

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "train a classifier");
  train->add_option("--train", train_args.train, "training TSV path");
  train->add_option("--scheme", train_args.scheme, "binary or four");
  train->add_option("--lang", train_args.lang, "en, hi, mr, or mix");
  train->add_option("--out", train_args.out, "checkpoint output path");
  train->add_option("--spec", train_args.spec_file,
                    "JSON file with model architecture fields");
  add_model_flags(train, train_args.model);
  add_train_flags(train, train_args.tf);
  train->add_option("--config", train_args.config, "JSON config file");
  train->add_option("--manifest", train_args.manifest, "manifest path");
  train->callback([&] { run_train(train, train_args); });

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score a checkpoint on a test set");
  eval->add_option("--model", eval_args.model, "checkpoint path");
  eval->add_option("--test", eval_args.test, "test TSV path");
  eval->add_option("--lang", eval_args.lang,
                   "override the checkpoint's language");
  eval->add_option("--out", eval_args.out, "report JSON output path");
  eval->add_option("--config", eval_args.config, "JSON config file");
  eval->add_option("--manifest", eval_args.manifest, "manifest path");
  eval->callback([&] { run_eval(eval, eval_args); });

  ExperimentArgs exp_args;
  auto* exp =
      app.add_subcommand("experiment", "multi-seed training variance sweep");
  exp->add_option("--train", exp_args.train, "training TSV path");
  exp->add_option("--test", exp_args.test, "test TSV path");
  exp->add_option("--scheme", exp_args.scheme, "binary or four");
  exp->add_option("--lang", exp_args.lang, "en, hi, mr, or mix");
  exp->add_option("--out", exp_args.out, "sweep report JSON path");
  exp->add_option("--seeds", exp_args.seeds, "comma-separated seed list")
      ->delimiter(',');
  add_model_flags(exp, exp_args.model);
  add_train_flags(exp, exp_args.tf);
  exp->add_option("--config", exp_args.config, "JSON config file");
  exp->add_option("--manifest", exp_args.manifest, "manifest path");
  exp->callback([&] { run_experiment(exp, exp_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const offlang::UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
