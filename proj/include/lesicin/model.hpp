#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lesicin/attribute_encoder.hpp"
#include "lesicin/autodiff.hpp"
#include "lesicin/corpus.hpp"
#include "lesicin/graph.hpp"
#include "lesicin/match_scorer.hpp"
#include "lesicin/structural_encoder.hpp"

namespace lesicin {

enum class StructuralMode { Metapath, Lookup };
std::string to_string(StructuralMode m);
StructuralMode structural_mode_from_string(const std::string& s);

struct ModelConfig {
  int emb_dim = 200;
  int hidden = 200;       // d'
  int node_dim = 200;     // d_A
  int summary_dim = 200;  // d_m
  int score_dim = 200;    // d_s
  int max_sents = 128;
  int max_words = 64;
  int instances = 8;  // k per schema
  double dropout = 0.5;
  double leaky_slope = 0.01;
  bool dynamic_context = true;
  bool exclude_self = false;
  StructuralMode structural = StructuralMode::Metapath;
  std::uint64_t seed = 0;  // parameter init and evaluation-time sampling
};

// The three score sets of one batch, each |S| x B. `structural` is only
// produced in training.
struct ScoreTriple {
  ad::Var attribute;
  std::optional<ad::Var> structural;
  ad::Var alignment;
};

// Section-side quantities that every prediction reuses.
struct SectionState {
  ad::Matrix attr_contextualized, attr_keys;
  ad::Matrix struct_contextualized, struct_keys;
};

struct FactScores {
  ad::Vector attribute;
  ad::Vector alignment;
};

class Model {
 public:
  Model(ModelConfig cfg, Vocabulary vocab, StatuteHierarchy hierarchy, HeteroGraph graph,
        const ad::Matrix* pretrained = nullptr);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  const StatuteHierarchy& hierarchy() const { return hierarchy_; }
  const HeteroGraph& graph() const { return *graph_; }
  std::size_t section_count() const { return hierarchy_.section_count(); }
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }

  const AttributeEncoder& attribute_encoder() const { return han_; }
  const StructuralEncoder& structural_encoder() const { return struct_; }
  const MatchScorer& scorer() const { return scorer_; }

  TextGrid grid(const FactDocument& doc) const;
  const std::vector<TextGrid>& section_grids() const { return section_grids_; }

  // Training pass over facts that are nodes of the graph. With
  // `with_structural` false the structural score is skipped. Dropout runs
  // when `dropout_rng` is set.
  ScoreTriple forward(ad::Tape& t, std::span<const FactDocument* const> facts,
                      std::uint64_t sample_seed, std::mt19937_64* dropout_rng,
                      bool with_structural = true) const;

  // Section-side state for inference; deterministic given the model seed.
  SectionState section_state() const;
  // Attribute and alignment scores of one fact. Never touches the graph.
  FactScores score_fact(const SectionState& state, const FactDocument& fact) const;

  // Structural embeddings of the given nodes (all of one type).
  ad::Var structural_embeddings(ad::Tape& t, std::span<const NodeId> nodes, ad::Var attr,
                                std::uint64_t seed) const;

 private:
  ModelConfig cfg_;
  Vocabulary vocab_;
  StatuteHierarchy hierarchy_;
  std::unique_ptr<HeteroGraph> graph_;
  std::vector<TextGrid> section_grids_;
  std::vector<NodeId> section_nodes_;
  ad::ParameterStore params_;
  AttributeEncoder han_;
  StructuralEncoder struct_;
  LookupEncoder lookup_;
  MatchScorer scorer_;
};

}  // namespace lesicin
