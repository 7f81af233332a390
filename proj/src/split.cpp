#include "lesicin/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace lesicin {

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw std::invalid_argument("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split ratios must sum to 1");
}

std::array<std::size_t, 3> fold_targets(std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t assigned = 0;
  for (int j = 0; j < 3; ++j) {
    double exact = static_cast<double>(n) * ratios[j];
    out[j] = static_cast<std::size_t>(std::floor(exact));
    rem[j] = exact - std::floor(exact);
    assigned += out[j];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++out[order[k]];
  return out;
}

namespace {

// The demand-driven pass can leave folds a few documents off their size
// targets. Move documents out of over-full folds one at a time, each time
// taking the move that least increases sum_l sum_j (count - desired)^2 over
// per-fold label counts. Ties go to the lowest document index.
void rebalance(const std::vector<std::vector<int>>& doc_labels,
               const std::vector<std::vector<std::size_t>>& by_label,
               const std::array<double, 3>& ratios, const std::array<std::size_t, 3>& targets,
               std::vector<int>& assignment) {
  const std::size_t n_labels = by_label.size();
  std::vector<std::array<double, 3>> excess(n_labels);  // count - desired
  for (std::size_t l = 0; l < n_labels; ++l) {
    for (int j = 0; j < 3; ++j) excess[l][j] = -static_cast<double>(by_label[l].size()) * ratios[j];
    for (std::size_t i : by_label[l]) excess[l][static_cast<std::size_t>(assignment[i])] += 1.0;
  }
  std::array<long, 3> size{};
  for (int a : assignment) ++size[static_cast<std::size_t>(a)];
  for (;;) {
    std::vector<int> over, under;
    for (int j = 0; j < 3; ++j) {
      if (size[j] > static_cast<long>(targets[j])) over.push_back(j);
      if (size[j] < static_cast<long>(targets[j])) under.push_back(j);
    }
    if (over.empty()) return;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_doc = 0;
    int best_to = -1;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
      const int from = assignment[i];
      if (std::find(over.begin(), over.end(), from) == over.end()) continue;
      for (int to : under) {
        double delta = 0.0;
        for (int l : doc_labels[i]) {
          const auto& e = excess[static_cast<std::size_t>(l)];
          delta += 2.0 - 2.0 * e[static_cast<std::size_t>(from)] + 2.0 * e[static_cast<std::size_t>(to)];
        }
        if (delta < best) {
          best = delta;
          best_doc = i;
          best_to = to;
        }
      }
    }
    const int from = assignment[best_doc];
    for (int l : doc_labels[best_doc]) {
      excess[static_cast<std::size_t>(l)][static_cast<std::size_t>(from)] -= 1.0;
      excess[static_cast<std::size_t>(l)][static_cast<std::size_t>(best_to)] += 1.0;
    }
    --size[static_cast<std::size_t>(from)];
    ++size[static_cast<std::size_t>(best_to)];
    assignment[best_doc] = best_to;
  }
}

}  // namespace

SplitResult iterative_stratified_split(std::span<const FactDocument> docs, const SplitSpec& spec) {
  spec.validate();
  if (docs.empty()) throw std::invalid_argument("iterative_stratified_split: empty corpus");

  // Dense label ids in first-seen order.
  std::map<std::string, int> label_id;
  std::vector<std::vector<int>> doc_labels(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (docs[i].labels.empty()) {
      throw std::invalid_argument("iterative_stratified_split: document " + docs[i].id +
                                  " has no labels");
    }
    for (const auto& l : docs[i].labels) {
      auto [it, inserted] = label_id.emplace(l, static_cast<int>(label_id.size()));
      doc_labels[i].push_back(it->second);
    }
  }
  const int n_labels = static_cast<int>(label_id.size());

  std::vector<std::vector<std::size_t>> by_label(static_cast<std::size_t>(n_labels));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (int l : doc_labels[i]) by_label[static_cast<std::size_t>(l)].push_back(i);
  }

  auto targets = fold_targets(docs.size(), spec.ratios);
  std::array<double, 3> capacity{};
  for (int j = 0; j < 3; ++j) capacity[j] = static_cast<double>(targets[j]);
  // demand[l][j]: desired remaining examples of label l in fold j.
  std::vector<std::array<double, 3>> demand(static_cast<std::size_t>(n_labels));
  for (int l = 0; l < n_labels; ++l) {
    for (int j = 0; j < 3; ++j) {
      demand[static_cast<std::size_t>(l)][j] =
          static_cast<double>(by_label[static_cast<std::size_t>(l)].size()) * spec.ratios[j];
    }
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<int> assignment(docs.size(), -1);
  std::vector<std::size_t> remaining(static_cast<std::size_t>(n_labels));
  for (int l = 0; l < n_labels; ++l) remaining[static_cast<std::size_t>(l)] = by_label[static_cast<std::size_t>(l)].size();
  std::size_t unassigned = docs.size();

  while (unassigned > 0) {
    // Label with the fewest (but > 0) unassigned examples; lowest id on ties.
    int pick = -1;
    for (int l = 0; l < n_labels; ++l) {
      std::size_t r = remaining[static_cast<std::size_t>(l)];
      if (r > 0 && (pick < 0 || r < remaining[static_cast<std::size_t>(pick)])) pick = l;
    }
    for (std::size_t i : by_label[static_cast<std::size_t>(pick)]) {
      if (assignment[i] >= 0) continue;
      // Folds with a zero ratio never receive documents.
      std::vector<int> cands;
      for (int j = 0; j < 3; ++j) {
        if (spec.ratios[j] > 0.0) cands.push_back(j);
      }
      auto keep_max = [&](auto key) {
        double best = -std::numeric_limits<double>::infinity();
        for (int j : cands) best = std::max(best, key(j));
        std::vector<int> kept;
        for (int j : cands) {
          if (key(j) == best) kept.push_back(j);
        }
        cands = std::move(kept);
      };
      keep_max([&](int j) { return demand[static_cast<std::size_t>(pick)][j]; });
      keep_max([&](int j) { return capacity[j]; });
      int fold = cands.front();
      if (cands.size() > 1) {
        std::uniform_int_distribution<std::size_t> u(0, cands.size() - 1);
        fold = cands[u(rng)];
      }
      assignment[i] = fold;
      --unassigned;
      capacity[fold] -= 1.0;
      for (int l : doc_labels[i]) {
        demand[static_cast<std::size_t>(l)][fold] -= 1.0;
        --remaining[static_cast<std::size_t>(l)];
      }
    }
  }

  rebalance(doc_labels, by_label, spec.ratios, targets, assignment);

  SplitResult result;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    result.folds[static_cast<std::size_t>(assignment[i])].push_back(docs[i]);
  }
  return result;
}

SplitReport split_report(std::span<const FactDocument> all, const SplitResult& split) {
  SplitReport rep;
  std::map<std::string, std::size_t> idx;
  for (const auto& d : all) {
    for (const auto& l : d.labels) idx.emplace(l, 0);
  }
  for (auto& [l, i] : idx) {
    i = rep.labels.size();
    rep.labels.push_back(l);
  }
  auto proportions = [&](std::span<const FactDocument> docs, std::vector<std::size_t>* counts_out) {
    std::vector<std::size_t> counts(rep.labels.size(), 0);
    for (const auto& d : docs) {
      for (const auto& l : d.labels) {
        auto it = idx.find(l);
        if (it != idx.end()) ++counts[it->second];
      }
    }
    std::vector<double> p(rep.labels.size(), 0.0);
    if (!docs.empty()) {
      for (std::size_t k = 0; k < p.size(); ++k) {
        p[k] = static_cast<double>(counts[k]) / static_cast<double>(docs.size());
      }
    }
    if (counts_out) *counts_out = counts;
    return p;
  };
  rep.global = proportions(all, &rep.support);
  for (int j = 0; j < 3; ++j) {
    rep.per_fold[j] = proportions(split.folds[j], nullptr);
    rep.sizes[j] = split.folds[j].size();
  }
  return rep;
}

}  // namespace lesicin
