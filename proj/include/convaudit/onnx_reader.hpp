#pragma once

// Topology-only reader for serialized ONNX ModelProto messages. Decodes the
// protobuf wire format directly; no protobuf runtime or generated code.
//
// Field numbers follow the public onnx.proto schema:
//   ModelProto.graph = 7
//   GraphProto.node = 1, name = 2, initializer = 5, input = 11, output = 12,
//              sparse_initializer = 15
//   NodeProto.input = 1, output = 2, name = 3, op_type = 4
//   ValueInfoProto.name = 1, TensorProto.name = 8, SparseTensorProto.values = 1
// Everything else (attributes, shapes, weights, subgraphs) is skipped.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "convaudit/error.hpp"
#include "convaudit/model_ir.hpp"

namespace convaudit {

namespace protowire {

enum class WireType : std::uint8_t { Varint = 0, Fixed64 = 1, Bytes = 2, Fixed32 = 5 };

struct Field {
  std::uint32_t number = 0;
  WireType type = WireType::Varint;
  std::uint64_t varint = 0;
  std::string_view bytes;
};

class Reader {
 public:
  explicit Reader(std::string_view buf) : buf_(buf) {}

  bool done() const noexcept { return pos_ >= buf_.size(); }

  Field next() {
    std::uint64_t key = varint();
    Field f;
    if ((key >> 3) == 0 || (key >> 3) > 0x1FFFFFFF) fail("invalid field number");
    f.number = static_cast<std::uint32_t>(key >> 3);
    switch (key & 7u) {
      case 0:
        f.type = WireType::Varint;
        f.varint = varint();
        break;
      case 1:
        f.type = WireType::Fixed64;
        take(8);
        break;
      case 2: {
        f.type = WireType::Bytes;
        std::uint64_t len = varint();
        if (len > buf_.size() - pos_) fail("length-delimited field runs past end");
        f.bytes = take(static_cast<std::size_t>(len));
        break;
      }
      case 5:
        f.type = WireType::Fixed32;
        take(4);
        break;
      default:
        fail("unsupported wire type " + std::to_string(key & 7u));
    }
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw AuditError(ErrorKind::MalformedInput, "protobuf@" + std::to_string(pos_), what);
  }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      if (pos_ >= buf_.size()) fail("truncated varint");
      auto b = static_cast<std::uint8_t>(buf_[pos_++]);
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if ((b & 0x80) == 0) return v;
    }
    fail("varint longer than 10 bytes");
  }

  std::string_view take(std::size_t n) {
    if (n > buf_.size() - pos_) fail("truncated field");
    auto out = buf_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::string_view buf_;
  std::size_t pos_ = 0;
};

inline std::string_view expect_bytes(const Field& f, std::string_view what) {
  if (f.type != WireType::Bytes) {
    throw AuditError(ErrorKind::MalformedInput, std::string(what), "expected length-delimited field");
  }
  return f.bytes;
}

}  // namespace protowire

namespace detail {

inline std::string message_name(std::string_view msg, std::uint32_t name_field) {
  protowire::Reader r(msg);
  std::string name;
  while (!r.done()) {
    auto f = r.next();
    if (f.number == name_field) name = std::string(protowire::expect_bytes(f, "name"));
  }
  return name;
}

inline GraphNode decode_node(std::string_view msg) {
  protowire::Reader r(msg);
  GraphNode n;
  while (!r.done()) {
    auto f = r.next();
    switch (f.number) {
      case 1: n.inputs.emplace_back(protowire::expect_bytes(f, "NodeProto.input")); break;
      case 2: n.outputs.emplace_back(protowire::expect_bytes(f, "NodeProto.output")); break;
      case 3: n.id = std::string(protowire::expect_bytes(f, "NodeProto.name")); break;
      case 4: n.op_type = std::string(protowire::expect_bytes(f, "NodeProto.op_type")); break;
      default: break;
    }
  }
  return n;
}

}  // namespace detail

// `fallback_id` is used when the graph carries no name.
inline ModelGraph parse_onnx_protobuf(std::string_view bytes,
                                      std::string_view fallback_id = "onnx_model",
                                      std::optional<std::string> id_override = std::nullopt) {
  using protowire::expect_bytes;

  std::optional<std::string_view> graph_msg;
  protowire::Reader model(bytes);
  while (!model.done()) {
    auto f = model.next();
    if (f.number == 7) graph_msg = expect_bytes(f, "ModelProto.graph");
  }

  std::string name;
  std::vector<GraphNode> nodes;
  std::vector<std::string> inputs, outputs;
  std::unordered_set<std::string> constants;
  if (graph_msg) {
    protowire::Reader graph(*graph_msg);
    while (!graph.done()) {
      auto f = graph.next();
      switch (f.number) {
        case 1: nodes.push_back(detail::decode_node(expect_bytes(f, "GraphProto.node"))); break;
        case 2: name = std::string(expect_bytes(f, "GraphProto.name")); break;
        case 5:
          constants.insert(detail::message_name(expect_bytes(f, "GraphProto.initializer"), 8));
          break;
        case 15: {
          protowire::Reader sparse(expect_bytes(f, "GraphProto.sparse_initializer"));
          while (!sparse.done()) {
            auto sf = sparse.next();
            if (sf.number == 1) constants.insert(detail::message_name(expect_bytes(sf, "values"), 8));
          }
          break;
        }
        case 11: inputs.push_back(detail::message_name(expect_bytes(f, "GraphProto.input"), 1)); break;
        case 12: outputs.push_back(detail::message_name(expect_bytes(f, "GraphProto.output"), 1)); break;
        default: break;
      }
    }
  }

  std::unordered_set<std::string> declared(inputs.begin(), inputs.end());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& n = nodes[i];
    if (n.id.empty()) n.id = "node_" + std::to_string(i);
    // Omitted optional operands are spelled "" on the wire; weights that are
    // not declared graph inputs carry no topology.
    std::erase_if(n.inputs, [&](const std::string& v) {
      return v.empty() || (constants.contains(v) && !declared.contains(v));
    });
    std::erase_if(n.outputs, [](const std::string& v) { return v.empty(); });
  }

  std::string model_id = id_override ? *id_override : (name.empty() ? std::string(fallback_id) : name);
  return ModelGraph::create(std::move(model_id), std::move(inputs), std::move(outputs),
                            std::move(nodes));
}

}  // namespace convaudit
