#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "offlang/errors.hpp"

namespace offlang {

enum class LabelScheme { Binary, FourClass };

// Canonical class order is fixed: Binary NOT=0, HOF=1;
// FourClass NONE=0, HATE=1, OFFN=2, PRFN=3.
inline constexpr std::array<std::string_view, 2> kBinaryClasses = {"NOT",
                                                                   "HOF"};
inline constexpr std::array<std::string_view, 4> kFourClasses = {
    "NONE", "HATE", "OFFN", "PRFN"};

inline int num_classes(LabelScheme scheme) {
  return scheme == LabelScheme::Binary ? 2 : 4;
}

inline std::span<const std::string_view> class_names(LabelScheme scheme) {
  if (scheme == LabelScheme::Binary) {
    return {kBinaryClasses.data(), kBinaryClasses.size()};
  }
  return {kFourClasses.data(), kFourClasses.size()};
}

struct Label {
  LabelScheme scheme = LabelScheme::Binary;
  int index = 0;  // position in the scheme's canonical class order

  friend bool operator==(const Label&, const Label&) = default;
};

inline std::string_view label_name(const Label& l) {
  return class_names(l.scheme)[static_cast<std::size_t>(l.index)];
}

// Shared-task files are hand-labeled and inconsistently cased, so tokens
// are normalized by trim + ASCII uppercase before matching.
inline std::string normalize_label_token(std::string_view token) {
  std::size_t b = 0, e = token.size();
  while (b < e && std::isspace(static_cast<unsigned char>(token[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(token[e - 1]))) --e;
  std::string out(token.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::toupper(c));
  });
  return out;
}

inline std::optional<Label> try_parse_label(std::string_view token,
                                            LabelScheme scheme) {
  const std::string norm = normalize_label_token(token);
  const auto names = class_names(scheme);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (norm == names[i]) {
      return Label{scheme, static_cast<int>(i)};
    }
  }
  return std::nullopt;
}

inline Label parse_label(std::string_view token, LabelScheme scheme) {
  if (auto l = try_parse_label(token, scheme)) return *l;
  throw ParseError("unknown label token '" + std::string(token) + "'");
}

inline std::string_view scheme_name(LabelScheme scheme) {
  return scheme == LabelScheme::Binary ? "binary" : "four";
}

inline std::optional<LabelScheme> try_parse_scheme(std::string_view s) {
  if (s == "binary" || s == "two" || s == "2") return LabelScheme::Binary;
  if (s == "four" || s == "4") return LabelScheme::FourClass;
  return std::nullopt;
}

enum class Language { English, Hindi, Marathi, CodeMixed };

inline std::string_view language_name(Language lang) {
  switch (lang) {
    case Language::English:
      return "en";
    case Language::Hindi:
      return "hi";
    case Language::Marathi:
      return "mr";
    case Language::CodeMixed:
      return "mix";
  }
  return "en";
}

inline std::optional<Language> try_parse_language(std::string_view s) {
  if (s == "en" || s == "english") return Language::English;
  if (s == "hi" || s == "hindi") return Language::Hindi;
  if (s == "mr" || s == "marathi") return Language::Marathi;
  if (s == "mix" || s == "code-mixed" || s == "codemixed") {
    return Language::CodeMixed;
  }
  return std::nullopt;
}

}  // namespace offlang
