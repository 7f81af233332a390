#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "lesicin/split.hpp"
#include "lesicin/synth.hpp"

using namespace lesicin;

namespace {

std::vector<FactDocument> skewed_corpus(std::uint64_t seed) {
  // Label l appears in docs drawn to reach counts 100/50/25/15/10; docs may
  // carry several labels.
  std::mt19937_64 rng(seed);
  const int counts[5] = {100, 50, 25, 15, 10};
  std::vector<std::set<std::string>> labels(200);
  for (int l = 0; l < 5; ++l) {
    std::vector<int> idx(200);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int k = 0; k < counts[l]; ++k) labels[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])].insert("L" + std::to_string(l));
  }
  std::vector<FactDocument> docs;
  for (int i = 0; i < 200; ++i) {
    auto& ls = labels[static_cast<std::size_t>(i)];
    if (ls.empty()) ls.insert("L0");
    docs.push_back(fixture::fact("d" + std::to_string(i), {ls.begin(), ls.end()}));
  }
  return docs;
}

// Brute-force label proportions: share of documents in `docs` carrying each label.
std::map<std::string, double> proportions(const std::vector<FactDocument>& docs) {
  std::map<std::string, double> p;
  for (const auto& d : docs)
    for (const auto& l : d.labels) p[l] += 1.0;
  for (auto& [l, v] : p) v /= static_cast<double>(docs.size());
  return p;
}

void expect_partition(const std::vector<FactDocument>& docs, const SplitResult& r) {
  std::multiset<std::string> got;
  for (const auto& f : r.folds)
    for (const auto& d : f) got.insert(d.id);
  std::multiset<std::string> want;
  for (const auto& d : docs) want.insert(d.id);
  EXPECT_EQ(got, want);
}

}  // namespace

TEST(FoldTargets, LargestRemainderSumsExactly) {
  EXPECT_EQ(fold_targets(66090, {0.64, 0.16, 0.20}), (std::array<std::size_t, 3>{42298, 10574, 13218}));
  for (std::size_t n : {1u, 2u, 7u, 99u, 1001u}) {
    auto t = fold_targets(n, {0.64, 0.16, 0.20});
    EXPECT_EQ(t[0] + t[1] + t[2], n);
  }
}

TEST(Split, IdenticalSingleLabelDocumentsSplitEvenly) {
  std::vector<FactDocument> docs;
  for (int i = 0; i < 10; ++i) docs.push_back(fixture::fact("d" + std::to_string(i), {"S1"}));
  SplitSpec spec;
  spec.ratios = {0.5, 0.5, 0.0};
  auto r = iterative_stratified_split(docs, spec);
  EXPECT_EQ(r.folds[0].size(), 5u);
  EXPECT_EQ(r.folds[1].size(), 5u);
  EXPECT_EQ(r.folds[2].size(), 0u);
}

TEST(Split, SkewedLabelsStayWithinTwoPointsOfGlobalProportions) {
  auto docs = skewed_corpus(1);
  SplitSpec spec;
  spec.ratios = {0.5, 0.25, 0.25};
  auto r = iterative_stratified_split(docs, spec);
  expect_partition(docs, r);
  auto global = proportions(docs);
  for (const auto& fold : r.folds) {
    auto p = proportions(fold);
    for (const auto& [l, g] : global) EXPECT_NEAR(p[l], g, 0.02) << l;
  }
}

TEST(Split, PartitionsAndIsDeterministic) {
  auto c = generate_synthetic({.n_docs = 300, .n_sections = 12, .seed = 4});
  SplitSpec spec;
  spec.seed = 17;
  auto a = iterative_stratified_split(c.docs, spec);
  auto b = iterative_stratified_split(c.docs, spec);
  expect_partition(c.docs, a);
  auto targets = fold_targets(300, spec.ratios);
  for (int j = 0; j < 3; ++j) {
    ASSERT_EQ(a.folds[j].size(), b.folds[j].size());
    EXPECT_LE(std::abs(static_cast<long>(a.folds[j].size()) - static_cast<long>(targets[j])), 1);
    for (std::size_t i = 0; i < a.folds[j].size(); ++i) EXPECT_EQ(a.folds[j][i].id, b.folds[j][i].id);
  }
}

TEST(Split, StratificationPropertyOnRandomLargeCorpora) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto c = generate_synthetic({.n_docs = 1200, .n_sections = 15, .seed = seed});
    SplitSpec spec;
    spec.seed = seed;
    auto r = iterative_stratified_split(c.docs, spec);
    auto global = proportions(c.docs);
    std::map<std::string, int> support;
    for (const auto& d : c.docs)
      for (const auto& l : d.labels) ++support[l];
    for (const auto& fold : r.folds) {
      auto p = proportions(fold);
      for (const auto& [l, g] : global) {
        if (support[l] >= 50) EXPECT_NEAR(p[l], g, 0.02) << "seed " << seed << " label " << l;
      }
    }
  }
}

TEST(Split, RejectsBadInput) {
  SplitSpec bad;
  bad.ratios = {0.5, 0.6, 0.0};
  std::vector<FactDocument> docs{fixture::fact("a", {"S1"})};
  EXPECT_THROW(iterative_stratified_split(docs, bad), std::invalid_argument);
  bad.ratios = {1.2, -0.2, 0.0};
  EXPECT_THROW(iterative_stratified_split(docs, bad), std::invalid_argument);
  EXPECT_THROW(iterative_stratified_split(std::vector<FactDocument>{}, SplitSpec{}), std::invalid_argument);
  std::vector<FactDocument> unlabeled{fixture::fact("a", {})};
  EXPECT_THROW(iterative_stratified_split(unlabeled, SplitSpec{}), std::invalid_argument);
}

TEST(SplitReport, ProportionsMatchBruteForce) {
  auto c = generate_synthetic({.n_docs = 200, .n_sections = 6, .seed = 2});
  auto r = iterative_stratified_split(c.docs, SplitSpec{});
  auto rep = split_report(c.docs, r);
  auto global = proportions(c.docs);
  for (std::size_t k = 0; k < rep.labels.size(); ++k) {
    EXPECT_NEAR(rep.global[k], global[rep.labels[k]], 1e-12);
    for (int j = 0; j < 3; ++j) {
      EXPECT_NEAR(rep.per_fold[j][k], proportions(r.folds[j])[rep.labels[k]], 1e-12);
    }
  }
}
