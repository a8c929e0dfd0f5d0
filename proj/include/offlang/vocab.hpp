#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "offlang/errors.hpp"
#include "offlang/unicode.hpp"

namespace offlang {

inline std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    if (uni::is_space(uni::decode(text, j))) {
      i = j;
      continue;
    }
    std::size_t end = i;
    while (end < text.size()) {
      std::size_t k = end;
      if (uni::is_space(uni::decode(text, k))) break;
      end = k;
    }
    tokens.emplace_back(text.substr(i, end - i));
    i = end;
  }
  return tokens;
}

// Whitespace-token vocabulary with four reserved ids. Built from the
// training split only; ids are contiguous and reserved ids are never
// reassigned.
struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kCtx = 3;
  static constexpr std::string_view kReservedTokens[4] = {"[PAD]", "[UNK]",
                                                          "[CLS]", "[CTX]"};

  std::vector<std::string> id_to_token = {"[PAD]", "[UNK]", "[CLS]", "[CTX]"};
  std::unordered_map<std::string, int> token_to_id = {
      {"[PAD]", kPad}, {"[UNK]", kUnk}, {"[CLS]", kCls}, {"[CTX]", kCtx}};

  int size() const { return static_cast<int>(id_to_token.size()); }

  int id_of(const std::string& token) const {
    const auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnk : it->second;
  }

  void add(std::string token) {
    const int id = size();
    token_to_id.emplace(token, id);
    id_to_token.push_back(std::move(token));
  }
};

// Ranks whitespace tokens by (frequency desc, first occurrence asc) and
// keeps the top max_size - 4 after the reserved ids. Tokens spelled like a
// reserved token already have an id and are skipped.
inline Vocab build_vocab(std::span<const std::string> corpus,
                         std::size_t max_size) {
  if (max_size <= 4) {
    throw ValidationError("vocab max_size must exceed the 4 reserved ids");
  }
  struct Entry {
    std::int64_t freq = 0;
    std::int64_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  std::int64_t position = 0;
  for (const std::string& text : corpus) {
    for (std::string& tok : split_tokens(text)) {
      const bool reserved =
          std::find(std::begin(Vocab::kReservedTokens),
                    std::end(Vocab::kReservedTokens),
                    tok) != std::end(Vocab::kReservedTokens);
      ++position;
      if (reserved) continue;
      auto [it, inserted] = counts.try_emplace(std::move(tok));
      if (inserted) it->second.first_seen = position;
      ++it->second.freq;
    }
  }
  std::vector<std::pair<std::string, Entry>> ranked(counts.begin(),
                                                    counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second.freq != b.second.freq) return a.second.freq > b.second.freq;
    return a.second.first_seen < b.second.first_seen;
  });
  Vocab v;
  const std::size_t keep = std::min(ranked.size(), max_size - 4);
  for (std::size_t i = 0; i < keep; ++i) v.add(std::move(ranked[i].first));
  return v;
}

struct Encoded {
  std::vector<int> ids;
  std::vector<std::uint8_t> mask;  // 1 = real token, 0 = padding

  std::size_t real_len() const {
    std::size_t n = 0;
    while (n < mask.size() && mask[n]) ++n;
    return n;
  }
};

// [CLS] + token ids (UNK for out-of-vocabulary), truncated to max_len and
// right-padded with PAD.
inline Encoded encode(std::string_view text, const Vocab& v,
                      std::size_t max_len) {
  if (max_len < 2) {
    throw std::invalid_argument("encode: max_len must be at least 2");
  }
  Encoded out;
  out.ids.assign(max_len, Vocab::kPad);
  out.mask.assign(max_len, 0);
  out.ids[0] = Vocab::kCls;
  out.mask[0] = 1;
  std::size_t pos = 1;
  for (const std::string& tok : split_tokens(text)) {
    if (pos >= max_len) break;
    out.ids[pos] = v.id_of(tok);
    out.mask[pos] = 1;
    ++pos;
  }
  return out;
}

}  // namespace offlang
