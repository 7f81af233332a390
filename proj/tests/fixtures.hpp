#pragma once

// Small corpora and graphs shared by the unit and acceptance tests.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "lesicin/corpus.hpp"
#include "lesicin/graph.hpp"

namespace fixture {

inline lesicin::Sentence words(std::initializer_list<const char*> ws) {
  lesicin::Sentence s;
  for (const char* w : ws) s.emplace_back(w);
  return s;
}

inline lesicin::Statute section(const std::string& id, const std::string& topic,
                                std::vector<lesicin::Sentence> text) {
  lesicin::Statute s;
  s.id = id;
  s.title = "section " + id;
  s.parent_topic = topic;
  s.sentences = std::move(text);
  return s;
}

inline lesicin::FactDocument fact(const std::string& id, std::vector<std::string> labels,
                                  std::vector<lesicin::Sentence> text = {},
                                  const std::string& split = "train") {
  lesicin::FactDocument f;
  f.id = id;
  f.court = "SC";
  f.labels = std::move(labels);
  f.sentences = text.empty() ? std::vector<lesicin::Sentence>{words({"fact", "text"})} : std::move(text);
  f.split = split;
  return f;
}

// A - C1 - T1 - S1.
inline lesicin::StatuteHierarchy chain() {
  lesicin::StatuteHierarchy h;
  h.set_act({"A", "act", ""});
  h.add_chapter({"C1", "chapter", "A"});
  h.add_topic({"T1", "topic", "C1"});
  h.add_section(section("S1", "T1", {words({"whoever", "causes", "hurt"})}));
  h.validate();
  return h;
}

// Chapter C2 holds topics T1 (S1, S2) and T2 (S3); chapter C1 holds T0 (S0).
// Facts: F1 cites S1, F2 cites S3, F3 cites S1 and S3.
inline lesicin::StatuteHierarchy figure_hierarchy() {
  lesicin::StatuteHierarchy h;
  h.set_act({"A", "act", ""});
  h.add_chapter({"C1", "chapter one", "A"});
  h.add_chapter({"C2", "chapter two", "A"});
  h.add_topic({"T0", "topic zero", "C1"});
  h.add_topic({"T1", "topic one", "C2"});
  h.add_topic({"T2", "topic two", "C2"});
  h.add_section(section("S0", "T0", {words({"theft", "of", "property"})}));
  h.add_section(section("S1", "T1", {words({"causing", "hurt"}), words({"with", "weapon"})}));
  h.add_section(section("S2", "T1", {words({"grievous", "hurt"})}));
  h.add_section(section("S3", "T2", {words({"wrongful", "restraint", "of", "person"})}));
  h.validate();
  return h;
}

inline std::vector<lesicin::FactDocument> figure_facts() {
  return {fact("F1", {"S1"}, {words({"he", "hit", "with", "weapon"})}),
          fact("F2", {"S3"}, {words({"she", "was", "restrained"})}),
          fact("F3", {"S1", "S3"}, {words({"hurt", "and", "restraint"}), words({"of", "person"})})};
}

// Random hierarchy and training facts, at most ~max_nodes nodes in total.
struct RandomCorpus {
  lesicin::StatuteHierarchy hierarchy;
  std::vector<lesicin::FactDocument> facts;
};

inline RandomCorpus random_corpus(std::mt19937_64& rng, int max_nodes = 50) {
  std::uniform_int_distribution<int> nc(1, 3), nt(1, 3), ns(1, 4);
  RandomCorpus c;
  auto& h = c.hierarchy;
  h.set_act({"A", "act", ""});
  int nodes = 1;
  int sections = 0;
  const int chapters = nc(rng);
  for (int ci = 0; ci < chapters; ++ci) {
    std::string cid = "C" + std::to_string(ci);
    h.add_chapter({cid, cid, "A"});
    ++nodes;
    const int topics = nt(rng);
    for (int ti = 0; ti < topics; ++ti) {
      std::string tid = cid + "T" + std::to_string(ti);
      h.add_topic({tid, tid, cid});
      ++nodes;
      const int secs = ns(rng);
      for (int si = 0; si < secs; ++si) {
        h.add_section(section("S" + std::to_string(sections++), tid, {words({"text"})}));
        ++nodes;
      }
    }
  }
  h.validate();
  const int budget = std::max(1, max_nodes - nodes);
  std::uniform_int_distribution<int> nf(1, std::min(budget, 25)), nl(1, std::min(sections, 3)),
      pick(0, sections - 1);
  const int facts = nf(rng);
  for (int f = 0; f < facts; ++f) {
    std::vector<std::string> labels;
    const int k = nl(rng);
    while (static_cast<int>(labels.size()) < k) {
      std::string s = "S" + std::to_string(pick(rng));
      if (std::find(labels.begin(), labels.end(), s) == labels.end()) labels.push_back(s);
    }
    c.facts.push_back(fact("F" + std::to_string(f), labels));
  }
  return c;
}

}  // namespace fixture
