#include "lesicin/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lesicin {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("prediction and gold lists differ in length");
}

LabelSet dedup(LabelSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

}  // namespace

std::vector<LabelMetrics> per_label_metrics(std::span<const LabelSet> preds,
                                            std::span<const LabelSet> golds,
                                            std::span<const std::string> universe) {
  check_lengths(preds.size(), golds.size());
  if (universe.empty()) throw std::invalid_argument("empty label universe");
  const int L = static_cast<int>(universe.size());
  std::vector<LabelMetrics> out(universe.size());
  for (int l = 0; l < L; ++l) out[static_cast<std::size_t>(l)].label = universe[static_cast<std::size_t>(l)];
  for (std::size_t i = 0; i < preds.size(); ++i) {
    LabelSet p = dedup(preds[i]);
    LabelSet g = dedup(golds[i]);
    for (int l : p) {
      if (l < 0 || l >= L) throw std::out_of_range("predicted label outside the universe");
      auto& m = out[static_cast<std::size_t>(l)];
      if (std::binary_search(g.begin(), g.end(), l)) {
        ++m.tp;
      } else {
        ++m.fp;
      }
    }
    for (int l : g) {
      if (l < 0 || l >= L) throw std::out_of_range("gold label outside the universe");
      auto& m = out[static_cast<std::size_t>(l)];
      ++m.support;
      if (!std::binary_search(p.begin(), p.end(), l)) ++m.fn;
    }
  }
  for (auto& m : out) {
    double p = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    double r = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    m.precision = 100.0 * p;
    m.recall = 100.0 * r;
    m.f1 = p + r > 0.0 ? 100.0 * 2.0 * p * r / (p + r) : 0.0;
  }
  return out;
}

MacroScores macro_of(std::span<const LabelMetrics> table) {
  if (table.empty()) throw std::invalid_argument("empty label universe");
  MacroScores s;
  for (const auto& m : table) {
    s.precision += m.precision;
    s.recall += m.recall;
    s.f1 += m.f1;
  }
  const double n = static_cast<double>(table.size());
  s.precision /= n;
  s.recall /= n;
  s.f1 /= n;
  return s;
}

MacroScores macro_prf(std::span<const LabelSet> preds, std::span<const LabelSet> golds,
                      std::span<const std::string> universe) {
  auto table = per_label_metrics(preds, golds, universe);
  return macro_of(table);
}

double mean_jaccard(std::span<const LabelSet> preds, std::span<const LabelSet> golds) {
  check_lengths(preds.size(), golds.size());
  if (preds.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    LabelSet p = dedup(preds[i]);
    LabelSet g = dedup(golds[i]);
    std::size_t inter = 0;
    for (int l : p) inter += std::binary_search(g.begin(), g.end(), l) ? 1 : 0;
    std::size_t uni = p.size() + g.size() - inter;
    total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }
  return 100.0 * total / static_cast<double>(preds.size());
}

std::vector<FrequencyGroup> frequency_group_report(std::span<const LabelMetrics> table, int groups) {
  if (groups < 1) throw std::invalid_argument("frequency_group_report: groups must be >= 1");
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table[a].support > table[b].support; });
  std::vector<FrequencyGroup> out;
  const std::size_t n = table.size(), G = static_cast<std::size_t>(groups);
  std::size_t at = 0;
  for (std::size_t g = 0; g < G; ++g) {
    std::size_t size = n / G + (g < n % G ? 1 : 0);
    FrequencyGroup fg;
    double sum = 0.0;
    for (std::size_t k = 0; k < size; ++k, ++at) {
      fg.labels.push_back(table[order[at]].label);
      sum += table[order[at]].f1;
    }
    fg.macro_f1 = size ? sum / static_cast<double>(size) : 0.0;
    out.push_back(std::move(fg));
  }
  return out;
}

std::vector<CourtScore> per_court_report(std::span<const LabelSet> preds,
                                         std::span<const LabelSet> golds,
                                         std::span<const std::string> courts,
                                         std::span<const std::string> universe) {
  check_lengths(preds.size(), golds.size());
  check_lengths(preds.size(), courts.size());
  std::map<std::string, std::vector<std::size_t>> parts;
  for (std::size_t i = 0; i < courts.size(); ++i) parts[courts[i]].push_back(i);
  std::vector<CourtScore> out;
  for (const auto& [court, idx] : parts) {
    std::vector<LabelSet> p, g;
    for (std::size_t i : idx) {
      p.push_back(preds[i]);
      g.push_back(golds[i]);
    }
    out.push_back({court, idx.size(), macro_prf(p, g, universe).f1});
  }
  return out;
}

EvalReport build_report(std::span<const LabelSet> preds, std::span<const LabelSet> golds,
                        std::span<const std::string> courts,
                        std::span<const std::string> universe) {
  EvalReport r;
  r.documents = preds.size();
  r.per_label = per_label_metrics(preds, golds, universe);
  MacroScores m = macro_of(r.per_label);
  r.macro_p = m.precision;
  r.macro_r = m.recall;
  r.macro_f1 = m.f1;
  r.jaccard = mean_jaccard(preds, golds);
  r.frequency_groups = frequency_group_report(r.per_label);
  r.per_court = per_court_report(preds, golds, courts, universe);
  return r;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["documents"] = documents;
  j["macro_p"] = macro_p;
  j["macro_r"] = macro_r;
  j["macro_f1"] = macro_f1;
  j["jaccard"] = jaccard;
  auto& labels = j["per_label"] = nlohmann::ordered_json::array();
  for (const auto& m : per_label) {
    labels.push_back({{"label", m.label},
                      {"precision", m.precision},
                      {"recall", m.recall},
                      {"f1", m.f1},
                      {"support", m.support}});
  }
  auto& groups = j["frequency_groups"] = nlohmann::ordered_json::array();
  for (const auto& g : frequency_groups) groups.push_back({{"labels", g.labels}, {"macro_f1", g.macro_f1}});
  auto& courts = j["per_court"] = nlohmann::ordered_json::array();
  for (const auto& c : per_court) {
    courts.push_back({{"court", c.court}, {"documents", c.documents}, {"macro_f1", c.macro_f1}});
  }
  return j.dump(2);
}

std::string EvalReport::to_text() const {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "documents %zu\nmacro-P %.2f  macro-R %.2f  macro-F1 %.2f  Jaccard %.2f\n",
                documents, macro_p, macro_r, macro_f1, jaccard);
  out << buf << "\nlabel            P       R      F1  support\n";
  for (const auto& m : per_label) {
    std::snprintf(buf, sizeof buf, "%-12s %6.2f  %6.2f  %6.2f  %7zu\n", m.label.c_str(), m.precision,
                  m.recall, m.f1, m.support);
    out << buf;
  }
  out << "\nfrequency groups (descending support)\n";
  for (std::size_t g = 0; g < frequency_groups.size(); ++g) {
    std::snprintf(buf, sizeof buf, "  group %zu  %3zu labels  macro-F1 %.2f\n", g + 1,
                  frequency_groups[g].labels.size(), frequency_groups[g].macro_f1);
    out << buf;
  }
  out << "\nper court\n";
  for (const auto& c : per_court) {
    std::snprintf(buf, sizeof buf, "  %-16s %6zu docs  macro-F1 %.2f\n", c.court.c_str(), c.documents,
                  c.macro_f1);
    out << buf;
  }
  return out.str();
}

}  // namespace lesicin
