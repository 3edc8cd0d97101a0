#include <random>

#include <gtest/gtest.h>

#include "convaudit/corpus_io.hpp"
#include "convaudit/op_analysis.hpp"
#include "support.hpp"

using namespace convaudit;
using testsupport::chain;

namespace {

Corpus corpus(CorpusRole role, std::vector<std::vector<std::string>> models) {
  std::vector<ModelGraph> gs;
  for (std::size_t i = 0; i < models.size(); ++i) gs.push_back(chain("m" + std::to_string(i), models[i]));
  return Corpus(role, std::move(gs));
}

}  // namespace

TEST(CollectOps, UnionOverModels) {
  EXPECT_EQ(collect_ops(corpus(CorpusRole::Correct, {{"Relu", "Add"}, {"Add", "MatMul"}})),
            (OperatorSet{"Add", "MatMul", "Relu"}));
  EXPECT_TRUE(collect_ops(Corpus(CorpusRole::Correct)).empty());
}

TEST(CollectOps, MatchesBruteForceOverNodes) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ModelGraph> gs;
    std::set<std::string> expect;
    for (int i = 0; i < 20; ++i) {
      gs.push_back(testsupport::random_dag(rng, 8, 10, "g" + std::to_string(i)));
      for (const auto& n : gs.back().nodes()) expect.insert(n.op_type);
    }
    EXPECT_EQ(collect_ops(Corpus(CorpusRole::Mismatched, gs)), expect);
  }
}

TEST(OpSetReport, SetAlgebra) {
  auto r = op_set_report(corpus(CorpusRole::Mismatched, {{"X", "Y"}}), corpus(CorpusRole::Correct, {{"Y", "Z"}}),
                         corpus(CorpusRole::TestSuite, {{"Y"}}));
  EXPECT_EQ(r.a_minus_b, (OperatorSet{"X"}));
  EXPECT_EQ(r.b_minus_a, (OperatorSet{"Z"}));
  EXPECT_EQ(r.a_minus_c, (OperatorSet{"X"}));
  EXPECT_TRUE(r.c_minus_a.empty());

  auto same = op_set_report(corpus(CorpusRole::Mismatched, {{"X", "Y"}}), corpus(CorpusRole::Correct, {{"Y", "X"}}),
                            corpus(CorpusRole::TestSuite, {}));
  EXPECT_TRUE(same.a_minus_b.empty());
  EXPECT_TRUE(same.b_minus_a.empty());
}

TEST(OpSetReport, FiveVersusFour) {
  // a = {A,B,C,D,E}, b = {A,B,C,D}: one operator only in mismatched models.
  auto r = op_set_report(corpus(CorpusRole::Mismatched, {{"A", "B", "C"}, {"D", "E"}}),
                         corpus(CorpusRole::Correct, {{"A", "B"}, {"C", "D"}}), corpus(CorpusRole::TestSuite, {}));
  EXPECT_EQ(r.set_a.size(), 5u);
  EXPECT_EQ(r.set_b.size(), 4u);
  EXPECT_EQ(r.a_minus_b, (OperatorSet{"E"}));
}

TEST(OpSetReport, RandomSetIdentities) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::string>> ms(3), cs(3), ts(3);
    for (auto* group : {&ms, &cs, &ts})
      for (auto& m : *group)
        for (int k = 0; k < 12; ++k)
          if (coin(rng)) m.push_back(testsupport::op_name(k));
    auto r = op_set_report(corpus(CorpusRole::Mismatched, ms), corpus(CorpusRole::Correct, cs),
                           corpus(CorpusRole::TestSuite, ts));
    EXPECT_EQ(set_union(r.a_minus_b, set_intersection(r.set_a, r.set_b)), r.set_a);
    EXPECT_TRUE(set_intersection(r.a_minus_b, r.set_b).empty());
    EXPECT_EQ(r.a_minus_b.size() + set_intersection(r.set_a, r.set_b).size(), r.set_a.size());
    EXPECT_EQ(r.c_minus_a.size() + set_intersection(r.set_c, r.set_a).size(), r.set_c.size());
    for (const auto& op : r.b_minus_a) EXPECT_FALSE(r.set_a.contains(op));
  }
}

TEST(H1, FullOverlapRejected) {
  auto r = op_set_report(corpus(CorpusRole::Mismatched, {{"A", "B"}}), corpus(CorpusRole::Correct, {{"B", "A"}}),
                         corpus(CorpusRole::TestSuite, {}));
  EXPECT_EQ(evaluate_h1(r).outcome, HypothesisOutcome::Rejected);
}

TEST(H1, AllButOneOrTwoSharedRejected) {
  // Many shared operator types with one or two extra mismatched-only ones.
  std::vector<std::string> shared;
  for (int k = 0; k < 26; ++k) shared.push_back(testsupport::op_name(k));
  for (int extra : {1, 2}) {
    auto m = shared;
    for (int e = 0; e < extra; ++e) m.push_back("Extra" + std::to_string(e));
    auto r = op_set_report(corpus(CorpusRole::Mismatched, {m}), corpus(CorpusRole::Correct, {shared}),
                           corpus(CorpusRole::TestSuite, {}));
    EXPECT_EQ(r.a_minus_b.size(), static_cast<std::size_t>(extra));
    EXPECT_EQ(evaluate_h1(r).outcome, HypothesisOutcome::Rejected);
  }
}

TEST(H1, SupportedWhenEveryModelUsesAnUnseenOperator) {
  // a = {Q,X,Y}, b = {X,Y,Z,W}: overlap 2/5; Q appears in all three models.
  auto r = op_set_report(corpus(CorpusRole::Mismatched, {{"Q", "X"}, {"Y", "Q"}, {"Q"}}),
                         corpus(CorpusRole::Correct, {{"X", "Y"}, {"Z", "W"}}), corpus(CorpusRole::TestSuite, {}));
  EXPECT_EQ(r.a_minus_b, (OperatorSet{"Q"}));
  for (const auto& [id, ops] : r.mismatched_models) EXPECT_TRUE(ops.contains("Q")) << id;
  auto v = evaluate_h1(r);
  EXPECT_EQ(v.outcome, HypothesisOutcome::Supported);
  EXPECT_EQ(v.evidence["a_minus_b"], nlohmann::ordered_json::array({"Q"}));
}

TEST(H1, InconclusiveWhenSomeModelLacksUnseenOperators) {
  auto r = op_set_report(corpus(CorpusRole::Mismatched, {{"Q", "X"}, {"Y"}}),
                         corpus(CorpusRole::Correct, {{"X", "Y"}, {"Z", "W"}}), corpus(CorpusRole::TestSuite, {}));
  EXPECT_EQ(evaluate_h1(r).outcome, HypothesisOutcome::Inconclusive);
}

TEST(H1, MonotoneInOverlap) {
  // Union fixed at 10 types; grow the intersection one step at a time.
  auto rank = [](HypothesisOutcome o) { return o == HypothesisOutcome::Rejected ? 0 : 1; };
  int prev = 1;
  for (int shared = 0; shared <= 8; ++shared) {
    std::vector<std::string> a, b;
    for (int k = 0; k < 10; ++k) {
      auto op = testsupport::op_name(k);
      if (k < shared) {
        a.push_back(op);
        b.push_back(op);
      } else if (k % 2 == 0) {
        a.push_back(op);
      } else {
        b.push_back(op);
      }
    }
    a.push_back("A");
    b.push_back("A");
    auto r = op_set_report(corpus(CorpusRole::Mismatched, {a}), corpus(CorpusRole::Correct, {b}),
                           corpus(CorpusRole::TestSuite, {}));
    int now = rank(evaluate_h1(r).outcome);
    EXPECT_LE(now, prev) << "shared=" << shared;
    prev = now;
  }
}

TEST(H1, NinetyFivePercentFixtureRejected) {
  auto load = [](const char* sub, CorpusRole role) {
    return load_corpus_dir(testsupport::fixture(std::string("ops_h1/") + sub), role).corpus;
  };
  auto r = op_set_report(load("mismatched", CorpusRole::Mismatched), load("correct", CorpusRole::Correct),
                         load("testsuite", CorpusRole::TestSuite));
  EXPECT_EQ(r.set_a.size(), 20u);
  EXPECT_EQ(set_intersection(r.set_a, r.set_b).size(), 19u);
  EXPECT_DOUBLE_EQ(jaccard(r.set_a, r.set_b), 0.95);
  EXPECT_EQ(evaluate_h1(r).outcome, HypothesisOutcome::Rejected);
  EXPECT_EQ(evaluate_h1(r, {0.96}).outcome, HypothesisOutcome::Inconclusive);
}

TEST(H1, InvalidThreshold) {
  OpSetReport r;
  EXPECT_THROW(evaluate_h1(r, {0.0}), AuditError);
  EXPECT_THROW(evaluate_h1(r, {1.5}), AuditError);
}

TEST(OpReport, RenderingListsOperatorsSorted) {
  auto r = op_set_report(corpus(CorpusRole::Mismatched, {{"Zeta", "Alpha", "Mid"}}),
                         corpus(CorpusRole::Correct, {{"Mid"}}), corpus(CorpusRole::TestSuite, {}));
  auto text = render_text(r);
  EXPECT_NE(text.find("(a) - (b): Alpha Zeta"), std::string::npos) << text;
  EXPECT_EQ(render_text(r), text);
}
