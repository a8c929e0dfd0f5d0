#pragma once

#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "offlang/errors.hpp"
#include "offlang/io.hpp"
#include "offlang/labels.hpp"

namespace offlang {

enum class Split { Train, Test };

struct Post {
  std::string id;
  std::string text;
  Language language = Language::English;
  Label label;
};

// Post order is the file order; loaders never reorder rows.
struct Dataset {
  std::vector<Post> posts;
  LabelScheme scheme = LabelScheme::Binary;
  Split split = Split::Train;
};

struct ClassCounts {
  LabelScheme scheme = LabelScheme::Binary;
  std::vector<long long> counts;  // indexed by canonical class order
  long long total = 0;
};

inline ClassCounts dataset_stats(const Dataset& d) {
  ClassCounts out;
  out.scheme = d.scheme;
  out.counts.assign(static_cast<std::size_t>(num_classes(d.scheme)), 0);
  for (const Post& p : d.posts) {
    ++out.counts[static_cast<std::size_t>(p.label.index)];
  }
  out.total = std::accumulate(out.counts.begin(), out.counts.end(), 0ll);
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.push_back(text.substr(start));
      break;
    }
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

}  // namespace detail

// Loads a HASOC-style flat TSV. Required columns: text_id, text, task_1;
// task_2 is additionally required when scheme is FourClass. Labels are
// matched case-insensitively after trimming. Rows with empty raw text are
// rejected outright rather than silently dropped.
inline Dataset load_dataset(const std::filesystem::path& path,
                            LabelScheme scheme, Split split,
                            Language language = Language::English) {
  const std::string raw = io::read_file(path);
  const auto lines = detail::split_lines(raw);
  if (lines.empty()) {
    throw SchemaError(path.string() + ": empty file, expected a header row");
  }

  const auto header = detail::split_tabs(lines[0]);
  std::unordered_map<std::string_view, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col.emplace(header[i], i);

  const auto require = [&](std::string_view name) -> std::size_t {
    const auto it = col.find(name);
    if (it == col.end()) {
      throw SchemaError(path.string() + ": missing column '" +
                        std::string(name) + "'");
    }
    return it->second;
  };
  const std::size_t id_col = require("text_id");
  const std::size_t text_col = require("text");
  const std::size_t label_col = scheme == LabelScheme::FourClass
                                    ? require("task_2")
                                    : require("task_1");
  if (scheme == LabelScheme::FourClass) require("task_1");

  Dataset out;
  out.scheme = scheme;
  out.split = split;
  out.posts.reserve(lines.size() - 1);
  std::unordered_set<std::string> seen_ids;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;  // tolerate blank separator lines
    const auto fields = detail::split_tabs(lines[li]);
    const std::size_t row = li + 1;  // 1-based physical line number
    if (fields.size() != header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(row) +
                       " has " + std::to_string(fields.size()) +
                       " fields, header has " +
                       std::to_string(header.size()));
    }
    Post p;
    p.id = std::string(fields[id_col]);
    p.text = std::string(fields[text_col]);
    p.language = language;
    if (p.id.empty()) {
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            " has an empty text_id");
    }
    if (p.text.empty()) {
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            " has empty text");
    }
    const auto label = try_parse_label(fields[label_col], scheme);
    if (!label) {
      throw ParseError(path.string() + ": row " + std::to_string(row) +
                       ": unknown label token '" +
                       std::string(fields[label_col]) + "'");
    }
    p.label = *label;
    out.posts.push_back(std::move(p));
    if (!seen_ids.insert(out.posts.back().id).second) {
      throw ValidationError(path.string() + ": row " + std::to_string(row) +
                            ": duplicate text_id '" + out.posts.back().id +
                            "'");
    }
  }
  return out;
}

// One node of an ICHCL conversation thread. Every node carries its own
// binary label; child order is preserved from the input file.
struct ConversationTree {
  std::string id;
  std::string text;
  Label label;  // Binary scheme
  std::vector<ConversationTree> children;
};

inline std::size_t count_nodes(const ConversationTree& t) {
  std::size_t n = 1;
  for (const auto& c : t.children) n += count_nodes(c);
  return n;
}

namespace detail {

inline ConversationTree parse_conversation_node(
    const nlohmann::json& j, std::unordered_set<std::string>& seen_ids,
    const std::string& where) {
  if (!j.is_object()) {
    throw ParseError(where + ": conversation node must be a JSON object");
  }
  ConversationTree node;
  if (!j.contains("id") || !j["id"].is_string()) {
    throw ParseError(where + ": conversation node missing string 'id'");
  }
  node.id = j["id"].get<std::string>();
  if (node.id.empty()) {
    throw ValidationError(where + ": conversation node has empty id");
  }
  if (!seen_ids.insert(node.id).second) {
    throw ValidationError(where + ": repeated node id '" + node.id + "'");
  }
  if (!j.contains("text") || !j["text"].is_string()) {
    throw ParseError(where + ": node '" + node.id +
                     "' missing string 'text'");
  }
  node.text = j["text"].get<std::string>();
  if (node.text.empty()) {
    throw ValidationError(where + ": node '" + node.id + "' has empty text");
  }
  if (!j.contains("label") || !j["label"].is_string()) {
    throw ParseError(where + ": node '" + node.id + "' missing 'label'");
  }
  const auto label =
      try_parse_label(j["label"].get<std::string>(), LabelScheme::Binary);
  if (!label) {
    throw ParseError(where + ": node '" + node.id + "': unknown label '" +
                     j["label"].get<std::string>() + "'");
  }
  node.label = *label;
  if (j.contains("comments")) {
    if (!j["comments"].is_array()) {
      throw ParseError(where + ": node '" + node.id +
                       "': 'comments' must be an array");
    }
    for (const auto& child : j["comments"]) {
      node.children.push_back(
          parse_conversation_node(child, seen_ids, where));
    }
  }
  return node;
}

}  // namespace detail

// Loads a conversation file: a JSON array of records (or one record), each
// {"id", "text", "label", "comments": [...]}. Node ids must be unique
// across the whole file, which also rules out cyclic references.
inline std::vector<ConversationTree> load_conversations(
    const std::filesystem::path& path) {
  const std::string raw = io::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": invalid JSON: " + e.what());
  }
  std::unordered_set<std::string> seen_ids;
  std::vector<ConversationTree> trees;
  if (j.is_array()) {
    for (const auto& rec : j) {
      trees.push_back(
          detail::parse_conversation_node(rec, seen_ids, path.string()));
    }
  } else {
    trees.push_back(
        detail::parse_conversation_node(j, seen_ids, path.string()));
  }
  return trees;
}

// Flattens a conversation tree into one Post per node, in pre-order. Each
// Post's text is the texts of all ancestors from the root down to the node,
// joined by " <separator> ", so a classifier sees the full thread context.
// The default separator token is "[CTX]".
inline std::vector<Post> flatten_conversation(
    const ConversationTree& tree, const std::string& separator = "[CTX]",
    Language language = Language::CodeMixed) {
  if (separator.empty()) {
    throw ValidationError("flatten_conversation: separator must be nonempty");
  }
  std::vector<Post> out;
  const auto walk = [&](const auto& self, const ConversationTree& node,
                        const std::string& prefix) -> void {
    std::string text =
        prefix.empty() ? node.text : prefix + " " + separator + " " + node.text;
    out.push_back(Post{node.id, text, language, node.label});
    for (const auto& child : node.children) {
      self(self, child, text);
    }
  };
  walk(walk, tree, "");
  return out;
}

}  // namespace offlang
