#pragma once

// Shared helpers for the test binaries: fixture paths, seeded generators, and
// brute-force reference implementations. The oracles deliberately avoid the
// library's own machinery (no successor lists, no automata).

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "convaudit/model_ir.hpp"
#include "convaudit/seq_analysis.hpp"

namespace testsupport {

using convaudit::GraphNode;
using convaudit::ModelGraph;
using convaudit::OpSequence;

inline std::filesystem::path data_dir() { return CONVAUDIT_DATA_DIR; }
inline std::filesystem::path fixture(const std::string& rel) { return data_dir() / "fixtures" / rel; }

inline GraphNode node(std::string id, std::string op, std::vector<std::string> in, std::vector<std::string> out) {
  return {std::move(id), std::move(op), std::move(in), std::move(out)};
}

// Chain x -> op0 -> op1 -> ... with values t1, t2, ...
inline ModelGraph chain(const std::string& id, const std::vector<std::string>& ops) {
  std::vector<GraphNode> nodes;
  std::string prev = "x";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    std::string out = "t" + std::to_string(i + 1);
    nodes.push_back(node("n" + std::to_string(i + 1), ops[i], {prev}, {out}));
    prev = out;
  }
  return ModelGraph::create(id, {"x"}, {prev}, std::move(nodes));
}

inline std::string op_name(int k) { return std::string(1, static_cast<char>('A' + k)); }

// Random DAG: node k may read the graph input or any output of a node
// created before it. Node ids are shuffled so id order differs from the
// topological order. Every value that nobody consumes becomes a graph output.
inline ModelGraph random_dag(std::mt19937_64& rng, int max_nodes, int alphabet, const std::string& id = "g") {
  std::uniform_int_distribution<int> count(1, max_nodes);
  const int n = count(rng);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<std::string> values = {"x"};
  std::vector<GraphNode> nodes;
  std::set<std::string> consumed;
  for (int k = 0; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
    std::uniform_int_distribution<int> fan(1, 2);
    std::set<std::string> ins;
    for (int f = fan(rng); f > 0; --f) ins.insert(values[pick(rng)]);
    std::uniform_int_distribution<int> op(0, alphabet - 1);
    char buf[8];
    std::snprintf(buf, sizeof buf, "n%02d", perm[k]);
    std::string out = std::string("v") + buf;
    nodes.push_back(node(buf, op_name(op(rng)), {ins.begin(), ins.end()}, {out}));
    consumed.insert(ins.begin(), ins.end());
    values.push_back(out);
  }
  std::vector<std::string> outputs;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!consumed.contains(values[i])) outputs.push_back(values[i]);
  return ModelGraph::create(id, {"x"}, outputs, std::move(nodes));
}

inline OpSequence random_seq(std::mt19937_64& rng, int max_len, int alphabet, int min_len = 1) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::uniform_int_distribution<int> op(0, alphabet - 1);
  OpSequence s(len(rng));
  for (auto& x : s) x = op_name(op(rng));
  return s;
}

namespace oracle {

// Maximal node paths, found by plain recursion over value names.
inline std::vector<OpSequence> all_paths(const ModelGraph& g) {
  const auto& nodes = g.nodes();
  auto feeds = [&](std::size_t p, std::size_t c) {
    for (const auto& o : nodes[p].outputs)
      for (const auto& i : nodes[c].inputs)
        if (o == i) return true;
    return false;
  };
  auto has_pred = [&](std::size_t c) {
    for (std::size_t p = 0; p < nodes.size(); ++p)
      if (feeds(p, c)) return true;
    return false;
  };
  auto has_succ = [&](std::size_t p) {
    for (std::size_t c = 0; c < nodes.size(); ++c)
      if (feeds(p, c)) return true;
    return false;
  };
  std::vector<OpSequence> out;
  OpSequence cur;
  std::function<void(std::size_t)> go = [&](std::size_t u) {
    cur.push_back(nodes[u].op_type);
    if (!has_succ(u)) out.push_back(cur);
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (feeds(u, v)) go(v);
    cur.pop_back();
  };
  for (std::size_t s = 0; s < nodes.size(); ++s)
    if (!has_pred(s)) go(s);
  return out;
}

inline std::set<OpSequence> substrings(const OpSequence& s, std::size_t min_len) {
  std::set<OpSequence> out;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + min_len; j <= s.size(); ++j) out.emplace(s.begin() + i, s.begin() + j);
  return out;
}

inline std::set<OpSequence> all_substrings(const std::vector<OpSequence>& paths, std::size_t min_len) {
  std::set<OpSequence> out;
  for (const auto& p : paths) out.merge(substrings(p, min_len));
  return out;
}

inline std::set<OpSequence> common(const std::vector<OpSequence>& x, const std::vector<OpSequence>& y,
                                   std::size_t min_len) {
  auto a = all_substrings(x, min_len);
  auto b = all_substrings(y, min_len);
  std::set<OpSequence> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

inline bool contains(const OpSequence& hay, const OpSequence& needle) {
  if (needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i)
    if (std::equal(needle.begin(), needle.end(), hay.begin() + i)) return true;
  return false;
}

inline std::set<OpSequence> longest_common(const OpSequence& a, const OpSequence& b) {
  auto sa = substrings(a, 1);
  std::set<OpSequence> best;
  std::size_t len = 0;
  for (const auto& s : sa) {
    if (!contains(b, s)) continue;
    if (s.size() > len) {
      best.clear();
      len = s.size();
    }
    if (s.size() == len) best.insert(s);
  }
  return best;
}

inline std::set<OpSequence> reduce(std::set<OpSequence> members, std::size_t min_len) {
  for (;;) {
    std::set<OpSequence> added;
    for (auto i = members.begin(); i != members.end(); ++i)
      for (auto j = std::next(i); j != members.end(); ++j)
        for (const auto& c : longest_common(*i, *j))
          if (c.size() >= min_len && !members.contains(c)) added.insert(c);
    if (added.empty()) break;
    members.merge(added);
  }
  std::set<OpSequence> out;
  for (const auto& m : members) {
    bool minimal = true;
    for (const auto& o : members)
      if (o != m && contains(m, o)) minimal = false;
    if (minimal) out.insert(m);
  }
  return out;
}

inline std::size_t support(const OpSequence& seq, const std::vector<std::vector<OpSequence>>& models) {
  std::size_t n = 0;
  for (const auto& paths : models)
    if (std::any_of(paths.begin(), paths.end(), [&](const auto& p) { return contains(p, seq); })) ++n;
  return n;
}

}  // namespace oracle

inline std::multiset<OpSequence> as_multiset(const std::vector<OpSequence>& v) { return {v.begin(), v.end()}; }

}  // namespace testsupport
