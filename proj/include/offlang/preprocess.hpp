#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "offlang/errors.hpp"
#include "offlang/labels.hpp"
#include "offlang/unicode.hpp"

namespace offlang {

// Text-cleaning configuration. Stop words are always kept; the flag exists
// so a config file can state that explicitly, and asking for removal is an
// error rather than a silent no-op.
struct PreprocessConfig {
  Language language = Language::English;
  std::string mention_token = "@user";
  std::set<char32_t> kept_punctuation = {U'.', U',', U'?', U'!'};
  bool keep_hashtags = true;
  bool keep_stopwords = true;

  static PreprocessConfig for_language(Language lang) {
    PreprocessConfig cfg;
    cfg.language = lang;
    if (lang == Language::Hindi || lang == Language::Marathi) {
      // Danda, double danda, and the ASCII pipe. Devanagari text on social
      // media writes sentence-final punctuation with either bar, so both
      // count as kept punctuation.
      cfg.kept_punctuation.insert(U'।');
      cfg.kept_punctuation.insert(U'॥');
      cfg.kept_punctuation.insert(U'|');
    }
    return cfg;
  }

  void validate() const {
    if (mention_token.empty()) {
      throw ValidationError("mention_token must be nonempty");
    }
    if (!keep_stopwords) {
      throw ValidationError("stop-word removal is not supported");
    }
  }
};

namespace detail {

inline bool is_mention_word_char(char32_t cp) {
  return uni::is_letter_or_digit(cp) || cp == U'_';
}

}  // namespace detail

// Replaces every maximal "@" + word-character run with the mention token.
// A standalone "@" (not followed by a word character) is left untouched.
inline std::string mask_mentions(std::string_view text,
                                 std::string_view mention_token = "@user") {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t at = i;
    const char32_t cp = uni::decode(text, i);
    if (cp != U'@') {
      out.append(text.substr(at, i - at));
      continue;
    }
    // Collect the maximal word-character run after '@'.
    std::size_t j = i;
    std::size_t run_end = i;
    while (j < text.size()) {
      const std::size_t prev = j;
      const char32_t wc = uni::decode(text, j);
      if (!detail::is_mention_word_char(wc)) {
        j = prev;
        break;
      }
      run_end = j;
    }
    if (run_end > i) {
      out.append(mention_token);
      i = run_end;
    } else {
      out.push_back('@');
    }
  }
  return out;
}

// Deletes substrings that start with "http://", "https://" or "www." up to
// (not including) the next whitespace. Leftover whitespace is collapsed by
// the later normalization step.
inline std::string strip_urls(std::string_view text) {
  static constexpr std::string_view kPrefixes[] = {"http://", "https://",
                                                   "www."};
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    bool url = false;
    for (const std::string_view p : kPrefixes) {
      if (text.substr(i, p.size()) == p) {
        url = true;
        break;
      }
    }
    if (url) {
      while (i < text.size()) {
        std::size_t j = i;
        if (uni::is_space(uni::decode(text, j))) break;
        i = j;
      }
      continue;
    }
    const std::size_t at = i;
    uni::decode(text, i);
    out.append(text.substr(at, i - at));
  }
  return out;
}

// Removes pictographic codepoints and emoji sequence components (flags,
// skin tones, ZWJ, emoji variation selectors).
inline std::string strip_emoji(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t at = i;
    const char32_t cp = uni::decode(text, i);
    if (uni::is_pictographic(cp) || uni::is_emoji_component(cp)) continue;
    out.append(text.substr(at, i - at));
  }
  return out;
}

// Keeps letters and digits (the Devanagari block included), whitespace,
// '@', '#' (when hashtags are kept), and the configured punctuation.
// Everything else is deleted.
inline std::string filter_chars(std::string_view text,
                                const PreprocessConfig& cfg) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t at = i;
    const char32_t cp = uni::decode(text, i);
    const bool keep = uni::is_letter_or_digit(cp) || uni::is_space(cp) ||
                      cp == U'@' || (cp == U'#' && cfg.keep_hashtags) ||
                      cfg.kept_punctuation.count(cp) > 0;
    if (keep) out.append(text.substr(at, i - at));
  }
  return out;
}

// Collapses whitespace runs to single ASCII spaces and trims the ends.
inline std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t at = i;
    const char32_t cp = uni::decode(text, i);
    if (uni::is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(text.substr(at, i - at));
  }
  return out;
}

namespace detail {

inline std::string preprocess_pass(std::string_view text,
                                   const PreprocessConfig& cfg) {
  return normalize_whitespace(filter_chars(
      strip_emoji(strip_urls(mask_mentions(text, cfg.mention_token))), cfg));
}

}  // namespace detail

// The full cleaning pipeline, applied in fixed order: mask mentions, strip
// URLs, strip emoji, filter characters, normalize whitespace. One pass is
// almost always a fixed point already; rare interactions (an emoji spliced
// inside "www." re-exposes a URL on the second look) need another pass, so
// the pipeline iterates until the output is stable. That makes
// preprocess(preprocess(x)) == preprocess(x) hold for every input.
inline std::string preprocess(std::string_view text,
                              const PreprocessConfig& cfg) {
  cfg.validate();
  std::string cur = detail::preprocess_pass(text, cfg);
  for (int guard = 0; guard < 7; ++guard) {
    std::string next = detail::preprocess_pass(cur, cfg);
    if (next == cur) break;
    cur = std::move(next);
  }
  return cur;
}

// Cleans context-flattened text while protecting the separator token, which
// is structural metadata rather than content (the character filter would
// otherwise strip its brackets). Segments between separator tokens are
// preprocessed independently and rejoined with the separator.
inline std::string preprocess_with_separator(std::string_view text,
                                             const PreprocessConfig& cfg,
                                             const std::string& separator) {
  if (separator.empty()) {
    throw ValidationError("separator must be nonempty");
  }
  // Split into whitespace-delimited tokens, grouping runs between separator
  // occurrences into segments.
  std::vector<std::string> segments;
  segments.emplace_back();
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
    const std::string_view token = text.substr(i, end - i);
    if (token == separator) {
      segments.emplace_back();
    } else {
      if (!segments.back().empty()) segments.back().push_back(' ');
      segments.back().append(token);
    }
    i = end;
  }
  std::string out;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (s > 0) {
      if (!out.empty()) out.push_back(' ');
      out.append(separator);
    }
    const std::string cleaned = preprocess(segments[s], cfg);
    if (!cleaned.empty()) {
      if (!out.empty()) out.push_back(' ');
      out.append(cleaned);
    }
  }
  return out;
}

// Standard cleanup applied before tokenization everywhere a model touches
// text: language-specific rules plus protection of the context separator.
inline std::string clean_for_model(std::string_view text, Language language,
                                   const std::string& separator = "[CTX]") {
  return preprocess_with_separator(text, PreprocessConfig::for_language(language),
                                   separator);
}

}  // namespace offlang
