#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lesicin/corpus.hpp"

namespace lesicin {

struct SplitSpec {
  std::array<double, 3> ratios{0.64, 0.16, 0.20};
  std::uint64_t seed = 0;

  // Throws std::invalid_argument unless ratios are non-negative and sum to 1.
  void validate() const;
};

struct SplitResult {
  std::array<std::vector<FactDocument>, 3> folds;  // train, val, test
};

// Fold size targets by largest remainder; they sum exactly to n.
std::array<std::size_t, 3> fold_targets(std::size_t n, const std::array<double, 3>& ratios);

// Iterative stratification over the documents' label sets. Every fold ends up
// with exactly its fold_targets() size. Documents keep their input order
// within each fold.
SplitResult iterative_stratified_split(std::span<const FactDocument> docs, const SplitSpec& spec);

// Per-label proportion (fraction of a fold's documents carrying the label)
// for the whole corpus and for each fold.
struct SplitReport {
  std::vector<std::string> labels;
  std::vector<double> global;
  std::array<std::vector<double>, 3> per_fold;
  std::array<std::size_t, 3> sizes{};
  std::vector<std::size_t> support;
};
SplitReport split_report(std::span<const FactDocument> all, const SplitResult& split);

}  // namespace lesicin
