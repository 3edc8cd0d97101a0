#pragma once

// Operator-sequence evidence.
//
// Every model is flattened into its simple paths (maximal source-to-sink
// node paths, each read as a string of operator names). Two models share a
// sequence when it occurs as a contiguous substring of a path in each of
// them. Sequences are compared as substrings throughout, including during
// reduction, where near-duplicates collapse onto their longest common
// substrings.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "convaudit/error.hpp"
#include "convaudit/hypothesis.hpp"
#include "convaudit/model_ir.hpp"
#include "convaudit/report.hpp"

namespace convaudit {

using OpSequence = std::vector<std::string>;

struct PathBudget {
  std::size_t max_paths_per_model = 10000;
};

inline constexpr std::size_t kDefaultMinSeqLen = 3;

class SeqSet {
 public:
  SeqSet() = default;
  explicit SeqSet(std::string provenance, std::set<OpSequence> seqs = {})
      : provenance_(std::move(provenance)), seqs_(std::move(seqs)) {}

  const std::string& provenance() const noexcept { return provenance_; }
  const std::set<OpSequence>& sequences() const noexcept { return seqs_; }
  std::size_t size() const noexcept { return seqs_.size(); }
  bool empty() const noexcept { return seqs_.empty(); }
  bool contains(const OpSequence& s) const { return seqs_.contains(s); }
  bool insert(OpSequence s) { return seqs_.insert(std::move(s)).second; }
  auto begin() const { return seqs_.begin(); }
  auto end() const { return seqs_.end(); }

  friend bool operator==(const SeqSet& a, const SeqSet& b) { return a.seqs_ == b.seqs_; }

 private:
  std::string provenance_;
  std::set<OpSequence> seqs_;
};

// True iff `needle` occurs contiguously inside `hay`.
template <typename T>
bool is_substring(std::span<const T> needle, std::span<const T> hay) {
  if (needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline bool is_substring(const OpSequence& needle, const OpSequence& hay) {
  return is_substring<std::string>(needle, hay);
}

// ---------------------------------------------------------------------------
// Simple paths

// Maximal paths from nodes without predecessors to nodes without successors,
// in DFS order with successors expanded by ascending node id. Throws
// PathExplosion when the path count exceeds the budget.
inline std::vector<OpSequence> simple_paths(const ModelGraph& g, const PathBudget& budget = {}) {
  const std::size_t n = g.size();
  const std::size_t cap = budget.max_paths_per_model;

  // Saturating path counts, computed sinks-first by memoized DFS.
  constexpr std::size_t kUnknown = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> count(n, kUnknown);
  std::function<std::size_t(std::size_t)> paths_from = [&](std::size_t u) -> std::size_t {
    if (count[u] != kUnknown) return count[u];
    const auto& succ = g.successors(u);
    std::size_t c = succ.empty() ? 1 : 0;
    for (std::size_t v : succ) c = std::min(cap + 1, c + paths_from(v));
    return count[u] = c;
  };

  std::vector<std::size_t> sources;
  for (std::size_t i = 0; i < n; ++i)
    if (g.in_degree(i) == 0) sources.push_back(i);
  std::sort(sources.begin(), sources.end(),
            [&](std::size_t a, std::size_t b) { return g.nodes()[a].id < g.nodes()[b].id; });

  std::size_t total = 0;
  for (std::size_t s : sources) total = std::min(cap + 1, total + paths_from(s));
  if (total > cap) {
    throw AuditError(ErrorKind::PathExplosion, g.model_id(),
                     "more than " + std::to_string(cap) + " simple paths");
  }

  std::vector<OpSequence> out;
  out.reserve(total);
  OpSequence current;
  std::function<void(std::size_t)> walk = [&](std::size_t u) {
    current.push_back(g.nodes()[u].op_type);
    const auto& succ = g.successors(u);
    if (succ.empty()) out.push_back(current);
    for (std::size_t v : succ) walk(v);
    current.pop_back();
  };
  for (std::size_t s : sources) walk(s);
  return out;
}

// ---------------------------------------------------------------------------
// Substring automaton

namespace detail {

class OpInterner {
 public:
  int intern(const std::string& op) {
    auto [it, inserted] = ids_.try_emplace(op, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(op);
    return it->second;
  }
  std::vector<int> intern(const OpSequence& seq) {
    std::vector<int> out;
    out.reserve(seq.size());
    for (const auto& op : seq) out.push_back(intern(op));
    return out;
  }
  OpSequence names(std::span<const int> ids) const {
    OpSequence out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(names_[static_cast<std::size_t>(id)]);
    return out;
  }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

struct IntSeqHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (int x : v) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

using IntSeqSet = std::unordered_set<std::vector<int>, IntSeqHash>;

// Generalized suffix automaton: a DFA accepting exactly the substrings of a
// set of sequences. Each distinct substring reaches exactly one state.
class SubstringAutomaton {
 public:
  SubstringAutomaton() { states_.push_back({0, -1, {}}); }

  template <typename Range>
  explicit SubstringAutomaton(const Range& sequences) : SubstringAutomaton() {
    for (const auto& s : sequences) add(s);
  }

  void add(std::span<const int> seq) {
    int last = 0;
    for (int c : seq) last = extend(last, c);
  }

  int step(int state, int c) const {
    const auto& next = states_[static_cast<std::size_t>(state)].next;
    auto it = next.find(c);
    return it == next.end() ? -1 : it->second;
  }

  bool contains(std::span<const int> seq) const {
    int s = 0;
    for (int c : seq) {
      s = step(s, c);
      if (s < 0) return false;
    }
    return true;
  }

  const std::map<int, int>& transitions(int state) const { return states_[static_cast<std::size_t>(state)].next; }

 private:
  struct State {
    std::size_t len;
    int link;
    std::map<int, int> next;
  };

  int clone_of(int p, int q, int c) {
    int clone = static_cast<int>(states_.size());
    State copy = states_[static_cast<std::size_t>(q)];
    copy.len = states_[static_cast<std::size_t>(p)].len + 1;
    states_.push_back(std::move(copy));
    states_[static_cast<std::size_t>(q)].link = clone;
    while (p != -1) {
      auto& next = states_[static_cast<std::size_t>(p)].next;
      auto it = next.find(c);
      if (it == next.end() || it->second != q) break;
      it->second = clone;
      p = states_[static_cast<std::size_t>(p)].link;
    }
    return clone;
  }

  int extend(int last, int c) {
    if (int q = step(last, c); q >= 0) {
      if (states_[static_cast<std::size_t>(last)].len + 1 == states_[static_cast<std::size_t>(q)].len) return q;
      return clone_of(last, q, c);
    }
    int cur = static_cast<int>(states_.size());
    states_.push_back({states_[static_cast<std::size_t>(last)].len + 1, 0, {}});
    int p = last;
    while (p != -1 && !states_[static_cast<std::size_t>(p)].next.contains(c)) {
      states_[static_cast<std::size_t>(p)].next[c] = cur;
      p = states_[static_cast<std::size_t>(p)].link;
    }
    if (p == -1) return cur;
    int q = states_[static_cast<std::size_t>(p)].next[c];
    if (states_[static_cast<std::size_t>(p)].len + 1 == states_[static_cast<std::size_t>(q)].len) {
      states_[static_cast<std::size_t>(cur)].link = q;
    } else {
      states_[static_cast<std::size_t>(cur)].link = clone_of(p, q, c);
    }
    return cur;
  }

  std::vector<State> states_;
};

// Enumerates every string accepted by both automata (the common substrings)
// with length >= min_len. The product of two DFAs is a DFA, so each common
// substring is visited exactly once.
inline void common_substrings(const SubstringAutomaton& x, const SubstringAutomaton& y, std::size_t min_len,
                              IntSeqSet& out) {
  std::vector<int> current;
  std::function<void(int, int)> dfs = [&](int sx, int sy) {
    const auto& tx = x.transitions(sx);
    const auto& ty = y.transitions(sy);
    auto ix = tx.begin();
    auto iy = ty.begin();
    while (ix != tx.end() && iy != ty.end()) {
      if (ix->first < iy->first) {
        ++ix;
      } else if (iy->first < ix->first) {
        ++iy;
      } else {
        current.push_back(ix->first);
        if (current.size() >= min_len) out.insert(current);
        dfs(ix->second, iy->second);
        current.pop_back();
        ++ix;
        ++iy;
      }
    }
  };
  dfs(0, 0);
}

inline std::vector<std::vector<int>> intern_all(OpInterner& interner, std::span<const OpSequence> paths) {
  std::vector<std::vector<int>> out;
  out.reserve(paths.size());
  for (const auto& p : paths) out.push_back(interner.intern(p));
  return out;
}

inline std::set<OpSequence> to_names(const OpInterner& interner, const IntSeqSet& seqs) {
  std::set<OpSequence> out;
  for (const auto& s : seqs) out.insert(interner.names(s));
  return out;
}

}  // namespace detail

// All runs of at least `min_len` operators occurring contiguously in some
// path of x and some path of y.
inline SeqSet common_sequences(std::span<const OpSequence> paths_x, std::span<const OpSequence> paths_y,
                               std::size_t min_len = kDefaultMinSeqLen) {
  detail::OpInterner interner;
  detail::SubstringAutomaton ax(detail::intern_all(interner, paths_x));
  detail::SubstringAutomaton ay(detail::intern_all(interner, paths_y));
  detail::IntSeqSet found;
  detail::common_substrings(ax, ay, min_len, found);
  return SeqSet("common", detail::to_names(interner, found));
}

// ---------------------------------------------------------------------------
// Corpus-level mining

// Simple paths of every model in a corpus. Models whose path count exceeds
// the budget are excluded (and listed) rather than sampled.
struct MinedCorpus {
  CorpusRole role = CorpusRole::Unlabeled;
  std::vector<std::string> model_ids;
  std::vector<std::vector<OpSequence>> paths;  // parallel to model_ids
  std::vector<std::string> excluded;

  std::size_t size() const noexcept { return model_ids.size(); }
};

inline MinedCorpus mine_paths(const Corpus& c, const PathBudget& budget = {}) {
  MinedCorpus m;
  m.role = c.role();
  for (const auto& g : c.models()) {
    try {
      m.paths.push_back(simple_paths(g, budget));
      m.model_ids.push_back(g.model_id());
    } catch (const AuditError& e) {
      if (e.kind() != ErrorKind::PathExplosion) throw;
      m.excluded.push_back(g.model_id());
    }
  }
  return m;
}

namespace detail {

inline std::vector<SubstringAutomaton> automata_for(OpInterner& interner, const MinedCorpus& c) {
  std::vector<SubstringAutomaton> out;
  out.reserve(c.size());
  for (const auto& paths : c.paths) out.emplace_back(intern_all(interner, paths));
  return out;
}

}  // namespace detail

// Sequences shared by at least one unordered pair of distinct models.
inline SeqSet shared_within(const MinedCorpus& c, std::size_t min_len = kDefaultMinSeqLen) {
  if (c.size() < 2) {
    throw AuditError(ErrorKind::InsufficientModels, std::string(to_string(c.role)),
                     std::to_string(c.size()) + " analyzable model(s), need 2");
  }
  detail::OpInterner interner;
  auto automata = detail::automata_for(interner, c);
  detail::IntSeqSet found;
  for (std::size_t i = 0; i < automata.size(); ++i)
    for (std::size_t j = i + 1; j < automata.size(); ++j) detail::common_substrings(automata[i], automata[j], min_len, found);
  return SeqSet("shared_within:" + std::string(to_string(c.role)), detail::to_names(interner, found));
}

// Sequences shared by at least one model of `a` and one model of `b`.
inline SeqSet shared_between(const MinedCorpus& a, const MinedCorpus& b, std::size_t min_len = kDefaultMinSeqLen) {
  for (const auto* c : {&a, &b}) {
    if (c->size() == 0) {
      throw AuditError(ErrorKind::InsufficientModels, std::string(to_string(c->role)), "no analyzable models");
    }
  }
  detail::OpInterner interner;
  auto aa = detail::automata_for(interner, a);
  auto ab = detail::automata_for(interner, b);
  detail::IntSeqSet found;
  for (const auto& x : aa)
    for (const auto& y : ab) detail::common_substrings(x, y, min_len, found);
  return SeqSet("shared_between:" + std::string(to_string(a.role)) + "," + std::string(to_string(b.role)),
                detail::to_names(interner, found));
}

inline SeqSet shared_within(const Corpus& c, const PathBudget& budget = {}, std::size_t min_len = kDefaultMinSeqLen) {
  return shared_within(mine_paths(c, budget), min_len);
}

inline SeqSet shared_between(const Corpus& a, const Corpus& b, const PathBudget& budget = {},
                             std::size_t min_len = kDefaultMinSeqLen) {
  return shared_between(mine_paths(a, budget), mine_paths(b, budget), min_len);
}

inline SeqSet seq_difference(const SeqSet& s2, const SeqSet& s3) {
  std::set<OpSequence> out;
  std::set_difference(s2.begin(), s2.end(), s3.begin(), s3.end(), std::inserter(out, out.end()));
  return SeqSet(s2.provenance() + " - " + s3.provenance(), std::move(out));
}

// ---------------------------------------------------------------------------
// Reduction

namespace detail {

// Every longest common substring of a and b (all ties), or nothing when the
// longest is shorter than min_len.
inline std::vector<std::vector<int>> longest_common_substrings(const std::vector<int>& a, const std::vector<int>& b,
                                                               std::size_t min_len) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  std::vector<std::size_t> ends;  // end offsets in a (exclusive)
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      if (cur[j] > best) {
        best = cur[j];
        ends.assign(1, i);
      } else if (cur[j] == best && best > 0) {
        ends.push_back(i);
      }
    }
    std::swap(prev, cur);
  }
  std::vector<std::vector<int>> out;
  if (best < min_len) return out;
  for (std::size_t e : ends) out.emplace_back(a.begin() + static_cast<std::ptrdiff_t>(e - best), a.begin() + static_cast<std::ptrdiff_t>(e));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// Collapses near-duplicate sequences onto their shared cores.
//
// Closure: for every pair of distinct members, add each of their longest
// common substrings of length >= min_len, until nothing new appears.
// Minimization: keep only members that contain no other member as a proper
// substring. The result is an antichain under the substring order and every
// input contains at least one output.
inline SeqSet reduce_sequences(const SeqSet& s, std::size_t min_len = kDefaultMinSeqLen) {
  detail::OpInterner interner;
  std::vector<std::vector<int>> members;
  detail::IntSeqSet present;
  for (const auto& seq : s) {  // lexicographic order
    auto ids = interner.intern(seq);
    if (present.insert(ids).second) members.push_back(std::move(ids));
  }

  // Each unordered pair is examined once; newly added members are compared
  // against everything before them when their turn comes.
  for (std::size_t i = 1; i < members.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      for (auto& core : detail::longest_common_substrings(members[i], members[j], min_len)) {
        if (present.insert(core).second) members.push_back(std::move(core));
      }
    }
  }

  detail::IntSeqSet minimal;
  for (const auto& m : members) {
    bool has_proper_sub = false;
    for (std::size_t len = 1; len < m.size() && !has_proper_sub; ++len) {
      for (std::size_t off = 0; off + len <= m.size(); ++off) {
        if (present.contains(std::vector<int>(m.begin() + static_cast<std::ptrdiff_t>(off),
                                              m.begin() + static_cast<std::ptrdiff_t>(off + len)))) {
          has_proper_sub = true;
          break;
        }
      }
    }
    if (!has_proper_sub) minimal.insert(m);
  }
  return SeqSet("reduced(" + s.provenance() + ")", detail::to_names(interner, minimal));
}

// ---------------------------------------------------------------------------
// Support and the sequence hypothesis

// Number of models in `c` with `seq` on at least one simple path.
inline std::size_t support(const OpSequence& seq, const MinedCorpus& c) {
  std::size_t n = 0;
  for (const auto& paths : c.paths) {
    if (std::any_of(paths.begin(), paths.end(), [&](const OpSequence& p) { return is_substring(seq, p); })) ++n;
  }
  return n;
}

inline std::size_t support(const OpSequence& seq, const Corpus& c, const PathBudget& budget = {}) {
  return support(seq, mine_paths(c, budget));
}

// Support of every sequence in `s`, via one automaton per model.
inline std::map<OpSequence, std::size_t> support_all(const SeqSet& s, const MinedCorpus& c) {
  detail::OpInterner interner;
  auto automata = detail::automata_for(interner, c);
  std::map<OpSequence, std::size_t> out;
  for (const auto& seq : s) {
    auto ids = interner.intern(seq);
    std::size_t n = 0;
    for (const auto& a : automata)
      if (a.contains(ids)) ++n;
    out.emplace(seq, n);
  }
  return out;
}

struct H2Thresholds {
  std::size_t reject_min_support = 2;  // below this max support: rejected
  double support_fraction = 0.5;       // max support / models at or above this: supported

  void validate() const {
    if (reject_min_support == 0) throw AuditError(ErrorKind::InvalidConfig, "h2_reject_min_support", "must be positive");
    if (!(support_fraction > 0 && support_fraction <= 1)) {
      throw AuditError(ErrorKind::InvalidConfig, "h2_support_fraction", "must lie in (0, 1]");
    }
  }
};

// support value -> number of sequences with that support
using SupportHistogram = std::map<std::size_t, std::size_t>;

inline HypothesisVerdict evaluate_h2(const SeqSet& unique_to_mismatched, const MinedCorpus& mismatched,
                                     const H2Thresholds& t = {}) {
  t.validate();
  auto supports = support_all(unique_to_mismatched, mismatched);
  SupportHistogram hist;
  std::size_t max_support = 0;
  for (const auto& [_, n] : supports) {
    ++hist[n];
    max_support = std::max(max_support, n);
  }
  const std::size_t models = mismatched.size();

  HypothesisVerdict v{Hypothesis::H2, HypothesisOutcome::Inconclusive, {}, {}};
  if (max_support < t.reject_min_support) {
    v.outcome = HypothesisOutcome::Rejected;
    v.summary = "no sequence unique to mismatched models is shared by " + std::to_string(t.reject_min_support) +
                " or more of them";
  } else if (models > 0 && static_cast<double>(max_support) / static_cast<double>(models) >= t.support_fraction) {
    v.outcome = HypothesisOutcome::Supported;
    v.summary = "a sequence unique to mismatched models occurs in " + std::to_string(max_support) + " of " +
                std::to_string(models) + " of them";
  } else {
    v.summary = "the most shared sequence occurs in only " + std::to_string(max_support) + " of " +
                std::to_string(models) + " mismatched models";
  }
  auto jh = nlohmann::ordered_json::object();
  for (const auto& [sup, count] : hist) jh[std::to_string(sup)] = count;
  v.evidence["sequences"] = unique_to_mismatched.size();
  v.evidence["models"] = models;
  v.evidence["max_support"] = max_support;
  v.evidence["support_histogram"] = std::move(jh);
  v.evidence["reject_min_support"] = t.reject_min_support;
  v.evidence["support_fraction"] = t.support_fraction;
  return v;
}

inline nlohmann::ordered_json to_json(const SeqSet& s) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& seq : s) arr.push_back(seq);
  return arr;
}

}  // namespace convaudit
