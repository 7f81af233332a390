#include <gtest/gtest.h>

#include <random>

#include "json.hpp"
#include "lesicin/evaluation.hpp"
#include "oracles.hpp"

using namespace lesicin;

namespace {

std::vector<std::string> labels(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("S" + std::to_string(i));
  return out;
}

std::vector<LabelSet> random_sets(std::mt19937_64& rng, std::size_t docs, int n_labels) {
  std::bernoulli_distribution coin(0.3);
  std::vector<LabelSet> out(docs);
  for (auto& s : out)
    for (int l = 0; l < n_labels; ++l)
      if (coin(rng)) s.push_back(l);
  return out;
}

}  // namespace

TEST(Metrics, WorkedExample) {
  // Label 0: tp 1, fp 1, fn 0. Label 1: tp 1, fp 0, fn 1. Label 2: never
  // predicted or gold, so all of P, R and F1 are 0.
  std::vector<LabelSet> preds{{0}, {0, 1}, {}};
  std::vector<LabelSet> golds{{0}, {1}, {1}};
  auto u = labels(3);
  auto table = per_label_metrics(preds, golds, u);
  EXPECT_DOUBLE_EQ(table[0].precision, 50.0);
  EXPECT_DOUBLE_EQ(table[0].recall, 100.0);
  EXPECT_NEAR(table[0].f1, 200.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(table[1].precision, 100.0);
  EXPECT_DOUBLE_EQ(table[1].recall, 50.0);
  EXPECT_EQ(table[1].support, 2u);
  EXPECT_EQ(table[2].f1, 0.0);
  auto m = macro_prf(preds, golds, u);
  EXPECT_DOUBLE_EQ(m.precision, 50.0);
  EXPECT_DOUBLE_EQ(m.recall, 50.0);
  EXPECT_NEAR(m.f1, 400.0 / 9.0, 1e-12);
  // Macro-F1 is the mean of per-label F1, not the F1 of mean P and R.
  EXPECT_GT(std::abs(m.f1 - 2 * m.precision * m.recall / (m.precision + m.recall)), 1.0);
  // Jaccard: 1, 1/2, 0.
  EXPECT_NEAR(mean_jaccard(preds, golds), 50.0, 1e-12);
}

TEST(Metrics, EmptyUnionCountsAsPerfectJaccard) {
  std::vector<LabelSet> preds{{}, {2}}, golds{{}, {3}};
  EXPECT_DOUBLE_EQ(mean_jaccard(preds, golds), 50.0);
}

TEST(Metrics, DuplicateIndicesAreCountedOnce) {
  std::vector<LabelSet> preds{{1, 1}}, golds{{1}};
  EXPECT_DOUBLE_EQ(mean_jaccard(preds, golds), 100.0);
  auto t = per_label_metrics(preds, golds, labels(2));
  EXPECT_EQ(t[1].tp, 1u);
  EXPECT_EQ(t[1].fp, 0u);
}

TEST(Metrics, MatchBruteForceOnRandomSets) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const int L = 2 + trial % 9;
    auto preds = random_sets(rng, 40, L);
    auto golds = random_sets(rng, 40, L);
    auto u = labels(L);
    auto table = per_label_metrics(preds, golds, u);
    auto want = oracle::per_label(preds, golds, L);
    for (int l = 0; l < L; ++l) {
      EXPECT_NEAR(table[static_cast<std::size_t>(l)].precision, want[static_cast<std::size_t>(l)].p, 1e-9);
      EXPECT_NEAR(table[static_cast<std::size_t>(l)].recall, want[static_cast<std::size_t>(l)].r, 1e-9);
      EXPECT_NEAR(table[static_cast<std::size_t>(l)].f1, want[static_cast<std::size_t>(l)].f1, 1e-9);
    }
    auto m = macro_prf(preds, golds, u);
    auto wm = oracle::macro(want);
    EXPECT_NEAR(m.precision, wm.p, 1e-9);
    EXPECT_NEAR(m.recall, wm.r, 1e-9);
    EXPECT_NEAR(m.f1, wm.f1, 1e-9);
    EXPECT_NEAR(mean_jaccard(preds, golds), oracle::jaccard(preds, golds), 1e-9);
  }
}

TEST(Metrics, RejectsMismatchedInput) {
  std::vector<LabelSet> one{{0}}, two{{0}, {1}};
  EXPECT_THROW(macro_prf(one, two, labels(2)), std::invalid_argument);
  EXPECT_THROW(macro_prf(one, one, std::vector<std::string>{}), std::invalid_argument);
  EXPECT_THROW(mean_jaccard(one, two), std::invalid_argument);
}

TEST(FrequencyGroups, SplitBySupportIntoFourGroups) {
  // Supports 5, 9, 1, 7, 3, 2, 8: descending order S1 S6 S3 S0 S4 S5 S2,
  // cut into groups of 2, 2, 2, 1.
  std::vector<LabelMetrics> table;
  const std::size_t support[7] = {5, 9, 1, 7, 3, 2, 8};
  for (int i = 0; i < 7; ++i) {
    LabelMetrics m;
    m.label = "S" + std::to_string(i);
    m.support = support[i];
    m.f1 = 10.0 * i;
    table.push_back(m);
  }
  auto g = frequency_group_report(table);
  ASSERT_EQ(g.size(), 4u);
  EXPECT_EQ(g[0].labels, (std::vector<std::string>{"S1", "S6"}));
  EXPECT_EQ(g[1].labels, (std::vector<std::string>{"S3", "S0"}));
  EXPECT_EQ(g[2].labels, (std::vector<std::string>{"S4", "S5"}));
  EXPECT_EQ(g[3].labels, (std::vector<std::string>{"S2"}));
  EXPECT_DOUBLE_EQ(g[0].macro_f1, 35.0);
  EXPECT_DOUBLE_EQ(g[3].macro_f1, 20.0);
}

TEST(PerCourt, MacroF1WithinEachCourt) {
  std::vector<LabelSet> preds{{0}, {1}, {0}}, golds{{0}, {0}, {0}};
  std::vector<std::string> courts{"HC", "SC", "HC"};
  auto u = labels(2);
  auto r = per_court_report(preds, golds, courts, u);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].court, "HC");
  EXPECT_EQ(r[0].documents, 2u);
  EXPECT_DOUBLE_EQ(r[0].macro_f1, 50.0);  // label 0 perfect, label 1 absent
  EXPECT_EQ(r[1].court, "SC");
  EXPECT_DOUBLE_EQ(r[1].macro_f1, 0.0);
}

TEST(Report, JsonCarriesHeadlineNumbers) {
  std::vector<LabelSet> preds{{0}, {0, 1}, {}}, golds{{0}, {1}, {1}};
  std::vector<std::string> courts{"SC", "SC", "HC"};
  auto r = build_report(preds, golds, courts, labels(3));
  auto j = nlohmann::json::parse(r.to_json());
  EXPECT_NEAR(j["macro_f1"].get<double>(), 400.0 / 9.0, 1e-12);
  EXPECT_EQ(j["documents"].get<int>(), 3);
  EXPECT_EQ(j["per_label"].size(), 3u);
  EXPECT_EQ(j["per_court"].size(), 2u);
  EXPECT_NE(r.to_text().find("macro"), std::string::npos);
}
