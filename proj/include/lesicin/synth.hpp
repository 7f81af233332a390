#pragma once

#include <cstdint>
#include <vector>

#include "lesicin/corpus.hpp"

namespace lesicin {

struct SynthConfig {
  int n_docs = 500;
  int n_sections = 10;
  int n_topics = 0;  // 0: max(1, n_sections / 2)
  std::uint64_t seed = 0;
  int keywords_per_section = 8;
  int keywords_per_topic = 4;
  int noise_vocab = 300;
  // Chance that each further cited section comes from the first one's topic.
  double same_topic_prob = 0.8;
  // Chance that a word of a fact sentence is a keyword of its focus section.
  double keyword_rate = 0.35;
  // Section popularity falls off as 1 / (rank + 1)^skew.
  double skew = 0.6;
  // Chance that a cited section after the first gets no sentence of its
  // own, so only co-citation points to it.
  double implicit_rate = 0.0;
};

struct SynthCorpus {
  StatuteHierarchy hierarchy;
  std::vector<FactDocument> docs;
};

// One act, two chapters, n_topics topics holding contiguous runs of
// sections. Each document cites 1 to 4 sections and its sentences mix their
// keywords with shared noise words. Deterministic given the seed.
SynthCorpus generate_synthetic(const SynthConfig& cfg);

}  // namespace lesicin
