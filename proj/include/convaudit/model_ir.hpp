#pragma once

// Operator-level computational graphs: the substrate every analysis in this
// library consumes. Only topology and operator names are modeled; weights,
// attributes and shapes are deliberately absent.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "convaudit/error.hpp"

namespace convaudit {

struct GraphNode {
  std::string id;
  std::string op_type;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

// A validated DAG of operator nodes. Construction goes through create(),
// which enforces every structural invariant; instances are immutable.
class ModelGraph {
 public:
  static ModelGraph create(std::string model_id, std::vector<std::string> inputs,
                           std::vector<std::string> outputs, std::vector<GraphNode> nodes);

  const std::string& model_id() const noexcept { return model_id_; }
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  const std::vector<std::string>& graph_inputs() const noexcept { return inputs_; }
  const std::vector<std::string>& graph_outputs() const noexcept { return outputs_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Node-to-node edges (producer -> consumer), deduplicated and ordered by
  // the consumer's node id.
  const std::vector<std::size_t>& successors(std::size_t node) const { return succ_[node]; }
  std::size_t in_degree(std::size_t node) const { return in_degree_[node]; }

  friend bool operator==(const ModelGraph& a, const ModelGraph& b) {
    return a.model_id_ == b.model_id_ && a.inputs_ == b.inputs_ && a.outputs_ == b.outputs_ &&
           a.nodes_ == b.nodes_;
  }

 private:
  ModelGraph() = default;

  std::string model_id_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::vector<GraphNode> nodes_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::size_t> in_degree_;
};

enum class CorpusRole { Mismatched, Correct, TestSuite, Unlabeled };

constexpr std::string_view to_string(CorpusRole role) {
  switch (role) {
    case CorpusRole::Mismatched: return "mismatched";
    case CorpusRole::Correct: return "correct";
    case CorpusRole::TestSuite: return "test_suite";
    case CorpusRole::Unlabeled: return "unlabeled";
  }
  return "unlabeled";
}

class Corpus {
 public:
  explicit Corpus(CorpusRole role, std::vector<ModelGraph> models = {}) : role_(role) {
    std::unordered_set<std::string> seen;
    for (const auto& m : models) {
      if (!seen.insert(m.model_id()).second) {
        throw AuditError(ErrorKind::DuplicateId, m.model_id(), "model id repeated in corpus");
      }
    }
    models_ = std::move(models);
  }

  CorpusRole role() const noexcept { return role_; }
  const std::vector<ModelGraph>& models() const noexcept { return models_; }
  std::size_t size() const noexcept { return models_.size(); }
  bool empty() const noexcept { return models_.empty(); }

 private:
  CorpusRole role_;
  std::vector<ModelGraph> models_;
};

using OperatorSet = std::set<std::string>;

inline OperatorSet operator_set(const ModelGraph& g) {
  OperatorSet ops;
  for (const auto& n : g.nodes()) ops.insert(n.op_type);
  return ops;
}

// ---------------------------------------------------------------------------

inline ModelGraph ModelGraph::create(std::string model_id, std::vector<std::string> inputs,
                                     std::vector<std::string> outputs,
                                     std::vector<GraphNode> nodes) {
  if (model_id.empty()) throw AuditError(ErrorKind::MalformedInput, "model_id", "empty model id");

  // value name -> producing node index; graph inputs map to npos
  constexpr std::size_t kGraphInput = static_cast<std::size_t>(-1);
  std::unordered_map<std::string, std::size_t> producer;
  for (const auto& in : inputs) {
    if (in.empty()) throw AuditError(ErrorKind::MalformedInput, "inputs", "empty value name");
    if (!producer.emplace(in, kGraphInput).second) {
      throw AuditError(ErrorKind::DuplicateId, in, "graph input listed twice");
    }
  }

  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.id.empty()) {
      throw AuditError(ErrorKind::MalformedInput, "node#" + std::to_string(i), "empty node id");
    }
    if (!ids.insert(n.id).second) throw AuditError(ErrorKind::DuplicateId, n.id, "node id");
    if (n.op_type.empty()) throw AuditError(ErrorKind::MalformedInput, n.id, "empty op_type");
    for (const auto& out : n.outputs) {
      if (out.empty()) throw AuditError(ErrorKind::MalformedInput, n.id, "empty output name");
      if (!producer.emplace(out, i).second) {
        throw AuditError(ErrorKind::DuplicateId, out, "value assigned more than once");
      }
    }
  }

  ModelGraph g;
  g.succ_.assign(nodes.size(), {});
  g.in_degree_.assign(nodes.size(), 0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (const auto& in : nodes[j].inputs) {
      if (in.empty()) throw AuditError(ErrorKind::MalformedInput, nodes[j].id, "empty input name");
      auto it = producer.find(in);
      if (it == producer.end()) throw AuditError(ErrorKind::DanglingReference, in);
      if (it->second != kGraphInput) g.succ_[it->second].push_back(j);
    }
  }
  for (const auto& out : outputs) {
    if (!producer.contains(out)) throw AuditError(ErrorKind::DanglingReference, out);
  }

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& s = g.succ_[i];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::sort(s.begin(), s.end(),
              [&](std::size_t a, std::size_t b) { return nodes[a].id < nodes[b].id; });
    for (std::size_t t : s) ++g.in_degree_[t];
  }

  // Kahn's algorithm; leftovers sit on or behind a cycle.
  std::vector<std::size_t> indeg = g.in_degree_;
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (indeg[i] == 0) ready.push_back(i);
  std::size_t visited = 0;
  while (!ready.empty()) {
    std::size_t u = ready.back();
    ready.pop_back();
    ++visited;
    for (std::size_t v : g.succ_[u])
      if (--indeg[v] == 0) ready.push_back(v);
  }
  if (visited != nodes.size()) {
    std::vector<std::vector<std::size_t>> pred(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t v : g.succ_[i]) pred[v].push_back(i);
    std::size_t cur = 0;
    while (indeg[cur] == 0) ++cur;
    // Walk backwards through unresolved nodes until one repeats: that node
    // lies on a cycle.
    std::vector<bool> seen(nodes.size(), false);
    while (!seen[cur]) {
      seen[cur] = true;
      for (std::size_t p : pred[cur]) {
        if (indeg[p] != 0) {
          cur = p;
          break;
        }
      }
    }
    throw AuditError(ErrorKind::CycleDetected, nodes[cur].id);
  }

  g.model_id_ = std::move(model_id);
  g.inputs_ = std::move(inputs);
  g.outputs_ = std::move(outputs);
  g.nodes_ = std::move(nodes);
  return g;
}

// ---------------------------------------------------------------------------
// JSON graph interchange

namespace detail {

inline std::vector<std::string> string_array(const nlohmann::json& j, std::string_view key) {
  if (!j.is_array()) throw AuditError(ErrorKind::MalformedInput, std::string(key), "expected array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_string()) {
      throw AuditError(ErrorKind::MalformedInput, std::string(key), "expected array of strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline const nlohmann::json& require(const nlohmann::json& obj, std::string_view key,
                                     std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw AuditError(ErrorKind::MalformedInput, std::string(key),
                     "missing key in " + std::string(where));
  }
  return *it;
}

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                                std::string_view where) {
  for (const auto& [k, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      throw AuditError(ErrorKind::MalformedInput, k, "unknown key in " + std::string(where));
    }
  }
}

inline std::string require_string(const nlohmann::json& obj, std::string_view key,
                                  std::string_view where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw AuditError(ErrorKind::MalformedInput, std::string(key), "expected string");
  return v.get<std::string>();
}

}  // namespace detail

inline ModelGraph graph_from_json(const nlohmann::json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw AuditError(ErrorKind::MalformedInput, "<root>", "expected object");
  reject_unknown_keys(doc, {"model_id", "inputs", "outputs", "nodes"}, "graph");

  const auto& jnodes = require(doc, "nodes", "graph");
  if (!jnodes.is_array()) throw AuditError(ErrorKind::MalformedInput, "nodes", "expected array");
  std::vector<GraphNode> nodes;
  nodes.reserve(jnodes.size());
  for (const auto& jn : jnodes) {
    if (!jn.is_object()) throw AuditError(ErrorKind::MalformedInput, "nodes", "expected objects");
    reject_unknown_keys(jn, {"id", "op_type", "inputs", "outputs"}, "node");
    nodes.push_back(GraphNode{require_string(jn, "id", "node"), require_string(jn, "op_type", "node"),
                              string_array(require(jn, "inputs", "node"), "inputs"),
                              string_array(require(jn, "outputs", "node"), "outputs")});
  }
  return ModelGraph::create(require_string(doc, "model_id", "graph"),
                            string_array(require(doc, "inputs", "graph"), "inputs"),
                            string_array(require(doc, "outputs", "graph"), "outputs"),
                            std::move(nodes));
}

inline ModelGraph parse_graph_json(std::string_view bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw AuditError(ErrorKind::MalformedInput, "json", e.what());
  }
  return graph_from_json(doc);
}

inline nlohmann::ordered_json graph_to_json(const ModelGraph& g) {
  nlohmann::ordered_json doc;
  doc["model_id"] = g.model_id();
  doc["inputs"] = g.graph_inputs();
  doc["outputs"] = g.graph_outputs();
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : g.nodes()) {
    nlohmann::ordered_json jn;
    jn["id"] = n.id;
    jn["op_type"] = n.op_type;
    jn["inputs"] = n.inputs;
    jn["outputs"] = n.outputs;
    nodes.push_back(std::move(jn));
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

inline std::string serialize_graph_json(const ModelGraph& g) { return graph_to_json(g).dump(); }

}  // namespace convaudit
