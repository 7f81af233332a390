#pragma once

#include <span>
#include <string>
#include <vector>

namespace lesicin {

// Indices into a label universe.
using LabelSet = std::vector<int>;

struct LabelMetrics {
  std::string label;
  double precision = 0.0;  // percentages
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold occurrences
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct MacroScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Per-label P/R/F1 from counts accumulated over all documents. Undefined
// precision or recall counts as 0; F1 is 0 when P + R = 0.
std::vector<LabelMetrics> per_label_metrics(std::span<const LabelSet> preds,
                                            std::span<const LabelSet> golds,
                                            std::span<const std::string> universe);
// Unweighted means over the universe, in percent. Throws on an empty
// universe or mismatched lengths.
MacroScores macro_prf(std::span<const LabelSet> preds, std::span<const LabelSet> golds,
                      std::span<const std::string> universe);
MacroScores macro_of(std::span<const LabelMetrics> table);

// Mean per-document |P ∩ G| / |P ∪ G| in percent; an empty union counts as 1.
double mean_jaccard(std::span<const LabelSet> preds, std::span<const LabelSet> golds);

struct FrequencyGroup {
  std::vector<std::string> labels;
  double macro_f1 = 0.0;
};
// Labels sorted by descending support (stable), cut into four consecutive
// groups as equal in size as possible (earlier groups take the remainder).
std::vector<FrequencyGroup> frequency_group_report(std::span<const LabelMetrics> table,
                                                   int groups = 4);

struct CourtScore {
  std::string court;
  std::size_t documents = 0;
  double macro_f1 = 0.0;
};
// Macro-F1 within each court's documents, courts in lexicographic order.
std::vector<CourtScore> per_court_report(std::span<const LabelSet> preds,
                                         std::span<const LabelSet> golds,
                                         std::span<const std::string> courts,
                                         std::span<const std::string> universe);

struct EvalReport {
  double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0, jaccard = 0.0;
  std::size_t documents = 0;
  std::vector<LabelMetrics> per_label;
  std::vector<FrequencyGroup> frequency_groups;
  std::vector<CourtScore> per_court;

  std::string to_json() const;
  std::string to_text() const;
};

EvalReport build_report(std::span<const LabelSet> preds, std::span<const LabelSet> golds,
                        std::span<const std::string> courts,
                        std::span<const std::string> universe);

}  // namespace lesicin
