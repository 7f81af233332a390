#pragma once

// Synthetic corpus plus a small model built on its training fold.

#include <memory>

#include "lesicin/pipeline.hpp"
#include "lesicin/synth.hpp"
#include "lesicin/training.hpp"

namespace fixture {

struct Setup {
  lesicin::SynthCorpus corpus;
  lesicin::PreparedData data;
  std::unique_ptr<lesicin::Model> model;
};

inline lesicin::ModelConfig tiny_model(int d = 8, std::uint64_t seed = 0) {
  lesicin::ModelConfig m;
  m.emb_dim = m.hidden = m.node_dim = m.summary_dim = m.score_dim = d;
  m.max_sents = 6;
  m.max_words = 12;
  m.instances = 2;
  m.seed = seed;
  return m;
}

inline Setup make_setup(const lesicin::SynthConfig& synth, const lesicin::ModelConfig& model,
                        std::uint64_t split_seed = 0) {
  Setup s;
  s.corpus = lesicin::generate_synthetic(synth);
  lesicin::SplitSpec spec;
  spec.seed = split_seed;
  s.data = lesicin::prepare_data(s.corpus.docs, s.corpus.hierarchy, spec, 1);
  s.model = lesicin::make_model(s.data, s.corpus.hierarchy, model);
  return s;
}

inline std::vector<const lesicin::FactDocument*> pointers(const std::vector<lesicin::FactDocument>& docs,
                                                          std::size_t n) {
  std::vector<const lesicin::FactDocument*> out;
  for (std::size_t i = 0; i < n && i < docs.size(); ++i) out.push_back(&docs[i]);
  return out;
}

}  // namespace fixture
