#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "offlang/errors.hpp"
#include "offlang/io.hpp"
#include "offlang/labels.hpp"
#include "offlang/model.hpp"
#include "offlang/vocab.hpp"

namespace offlang {

// Self-contained trained model: everything eval needs to run on new text.
struct Checkpoint {
  ClassifierSpec spec;
  LabelScheme scheme = LabelScheme::Binary;
  Language language = Language::English;
  Vocab vocab;
  ModelParams params;
};

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const std::string& s, std::size_t& off) {
  if (off + 4 > s.size()) throw ParseError("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + i]))
         << (8 * i);
  }
  off += 4;
  return v;
}

inline std::uint64_t get_u64(const std::string& s, std::size_t& off) {
  if (off + 8 > s.size()) throw ParseError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[off + i]))
         << (8 * i);
  }
  off += 8;
  return v;
}

inline const char* kind_name(ModelKind k) {
  return k == ModelKind::MiniTransformer ? "mini_transformer" : "linear_bow";
}

inline ModelKind parse_kind(const std::string& s) {
  if (s == "mini_transformer") return ModelKind::MiniTransformer;
  if (s == "linear_bow") return ModelKind::LinearBoW;
  throw ParseError("checkpoint: unknown model kind '" + s + "'");
}

}  // namespace detail

// Layout: magic "OLK1", u32 format version, u64 header length, JSON header
// (spec, scheme, language, vocab in id order, tensor names and shapes),
// then every tensor as raw little-endian 64-bit floats in header order.
// Doubles travel as bit patterns, so save/load round-trips exactly.
inline std::string serialize_checkpoint(const Checkpoint& c) {
  c.spec.validate();
  nlohmann::json header;
  header["spec"] = {{"kind", detail::kind_name(c.spec.kind)},
                    {"d_model", c.spec.d_model},
                    {"num_heads", c.spec.num_heads},
                    {"num_layers", c.spec.num_layers},
                    {"max_len", c.spec.max_len},
                    {"num_classes", c.spec.num_classes},
                    {"ffn_mult", c.spec.ffn_mult},
                    {"dropout", c.spec.dropout}};
  header["scheme"] = std::string(scheme_name(c.scheme));
  header["language"] = std::string(language_name(c.language));
  header["vocab"] = c.vocab.id_to_token;

  const auto refs = tensor_refs(c.params);
  nlohmann::json tensors = nlohmann::json::array();
  for (const ConstTensorRef& r : refs) {
    tensors.push_back({{"name", r.name}, {"rows", r.rows}, {"cols", r.cols}});
  }
  header["tensors"] = std::move(tensors);

  const std::string head = header.dump();
  std::string out = "OLK1";
  detail::put_u32(out, 1);
  detail::put_u64(out, head.size());
  out += head;
  for (const ConstTensorRef& r : refs) {
    for (const double x : *r.data) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      detail::put_u64(out, bits);
    }
  }
  return out;
}

inline Checkpoint parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "OLK1") != 0) {
    throw ParseError("not a checkpoint file (missing OLK1 magic)");
  }
  std::size_t off = 4;
  const std::uint32_t version = detail::get_u32(bytes, off);
  if (version != 1) {
    throw ParseError("unsupported checkpoint version " +
                     std::to_string(version));
  }
  const std::uint64_t head_len = detail::get_u64(bytes, off);
  if (off + head_len > bytes.size()) throw ParseError("checkpoint truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(off, head_len));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header is not valid JSON: ") +
                     e.what());
  }
  off += head_len;

  Checkpoint c;
  try {
    const auto& sp = header.at("spec");
    c.spec.kind = detail::parse_kind(sp.at("kind").get<std::string>());
    c.spec.d_model = sp.at("d_model").get<int>();
    c.spec.num_heads = sp.at("num_heads").get<int>();
    c.spec.num_layers = sp.at("num_layers").get<int>();
    c.spec.max_len = sp.at("max_len").get<int>();
    c.spec.num_classes = sp.at("num_classes").get<int>();
    c.spec.ffn_mult = sp.at("ffn_mult").get<int>();
    c.spec.dropout = sp.at("dropout").get<double>();

    const auto scheme = try_parse_scheme(header.at("scheme").get<std::string>());
    if (!scheme) throw ParseError("checkpoint: unknown label scheme");
    c.scheme = *scheme;
    const auto lang = try_parse_language(header.at("language").get<std::string>());
    if (!lang) throw ParseError("checkpoint: unknown language");
    c.language = *lang;

    const auto vocab_tokens = header.at("vocab").get<std::vector<std::string>>();
    if (vocab_tokens.size() < 4) {
      throw ParseError("checkpoint: vocabulary missing reserved ids");
    }
    for (int i = 0; i < 4; ++i) {
      if (vocab_tokens[static_cast<std::size_t>(i)] !=
          Vocab::kReservedTokens[i]) {
        throw ParseError("checkpoint: reserved vocabulary ids are damaged");
      }
    }
    for (std::size_t i = 4; i < vocab_tokens.size(); ++i) {
      c.vocab.add(vocab_tokens[i]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header field missing or wrong: ") +
                     e.what());
  }

  try {
    c.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("checkpoint spec invalid: ") + e.what());
  }

  c.params = shaped_params(c.spec, c.vocab.size());
  const auto refs = tensor_refs(c.params);
  try {
    const auto& tensors = header.at("tensors");
    if (!tensors.is_array() || tensors.size() != refs.size()) {
      throw ParseError(
          "checkpoint: tensor list does not match the model configuration");
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      const auto& t = tensors[i];
      if (t.at("name").get<std::string>() != refs[i].name ||
          t.at("rows").get<std::size_t>() != refs[i].rows ||
          t.at("cols").get<std::size_t>() != refs[i].cols) {
        throw ParseError("checkpoint: tensor '" + refs[i].name +
                         "' has an unexpected name or shape");
      }
      auto& data = *refs[i].data;
      for (std::size_t j = 0; j < data.size(); ++j) {
        const std::uint64_t bits = detail::get_u64(bytes, off);
        std::memcpy(&data[j], &bits, sizeof(double));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint tensor header damaged: ") +
                     e.what());
  }
  if (off != bytes.size()) {
    throw ParseError("checkpoint: trailing bytes after tensor data");
  }
  return c;
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  io::write_file_atomic(path, serialize_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(io::read_file(path));
}

}  // namespace offlang
