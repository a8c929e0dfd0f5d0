#pragma once

// Synthetic corpora with known structure, shared by the unit, CLI, and
// acceptance suites. Texts are lowercase space-separated words, so they are
// fixed points of the preprocessing rules and survive training-time cleanup
// unchanged.

#include <cstdint>
#include <string>
#include <vector>

#include "offlang/corpus.hpp"
#include "offlang/io.hpp"
#include "offlang/labels.hpp"
#include "offlang/rng.hpp"

namespace testsupport {

inline constexpr std::uint64_t kCorpusStream = 0x73796e74;  // "synt"

// Two disjoint keyword pools, one per class, so the Bayes-optimal
// classifier is perfect and any reasonable learner should approach it.
inline offlang::Dataset separable_corpus(std::size_t samples = 200,
                                         std::uint64_t seed = 42) {
  static const std::vector<std::string> kCalm = {
      "calm", "sunny", "gentle", "kind",   "peace",
      "garden", "smile", "warm",  "friend", "happy"};
  static const std::vector<std::string> kHarsh = {
      "filth", "rage",  "storm",  "venom",  "snarl",
      "grim",  "bitter", "harsh", "rotten", "cruel"};

  offlang::Rng rng = offlang::Rng::stream(seed, kCorpusStream);
  offlang::Dataset data;
  data.scheme = offlang::LabelScheme::Binary;
  data.split = offlang::Split::Train;
  data.posts.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const int cls = static_cast<int>(i % 2);
    const auto& pool = cls == 0 ? kCalm : kHarsh;
    const std::size_t len = 3 + rng.next_below(5);
    std::string text;
    for (std::size_t t = 0; t < len; ++t) {
      if (t > 0) text += ' ';
      text += pool[rng.next_below(pool.size())];
    }
    offlang::Post p;
    p.id = "s" + std::to_string(1000 + i);
    p.text = std::move(text);
    p.language = offlang::Language::English;
    p.label = offlang::Label{offlang::LabelScheme::Binary, cls};
    data.posts.push_back(std::move(p));
  }
  return data;
}

// 90/10 imbalanced corpus. The minority class has no private vocabulary:
// its marker token also appears in roughly a third of majority texts, so a
// learner that minimizes unweighted loss should ignore the marker and
// predict the majority class, while class-weighted training should flip
// the marker's decision. Every tenth sample is minority, giving an exact
// 90/10 split whenever samples is a multiple of ten.
inline offlang::Dataset imbalanced_corpus(std::size_t samples = 200,
                                          std::uint64_t seed = 7) {
  static const std::vector<std::string> kFiller = {
      "the",  "post",  "reply", "today", "people",
      "thing", "talk", "word",  "about", "again"};
  static const std::string kMarker = "zmark";

  offlang::Rng rng = offlang::Rng::stream(seed, kCorpusStream + 1);
  offlang::Dataset data;
  data.scheme = offlang::LabelScheme::Binary;
  data.split = offlang::Split::Train;
  data.posts.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const bool minority = i % 10 == 0;
    std::vector<std::string> words;
    const std::size_t len = 3 + rng.next_below(3);
    for (std::size_t t = 0; t < len; ++t) {
      words.push_back(kFiller[rng.next_below(kFiller.size())]);
    }
    const bool marked = minority || rng.next_real() < 0.35;
    if (marked) {
      words.insert(words.begin() + rng.next_below(words.size() + 1), kMarker);
    }
    std::string text;
    for (std::size_t t = 0; t < words.size(); ++t) {
      if (t > 0) text += ' ';
      text += words[t];
    }
    offlang::Post p;
    p.id = "i" + std::to_string(1000 + i);
    p.text = std::move(text);
    p.language = offlang::Language::English;
    p.label = offlang::Label{offlang::LabelScheme::Binary, minority ? 1 : 0};
    data.posts.push_back(std::move(p));
  }
  return data;
}

inline std::string to_tsv(const offlang::Dataset& data) {
  const bool four = data.scheme == offlang::LabelScheme::FourClass;
  std::string out = four ? "text_id\ttext\ttask_1\ttask_2\n"
                         : "text_id\ttext\ttask_1\n";
  for (const auto& p : data.posts) {
    out += p.id;
    out += '\t';
    out += p.text;
    out += '\t';
    if (four) {
      // task_1 collapses the four-class label onto the binary axis.
      out += p.label.index == 0 ? "NOT" : "HOF";
      out += '\t';
    }
    out += offlang::label_name(p.label);
    out += '\n';
  }
  return out;
}

inline void write_tsv(const std::filesystem::path& path,
                      const offlang::Dataset& data) {
  offlang::io::write_file_atomic(path.string(), to_tsv(data));
}

}  // namespace testsupport
