#include "lesicin/model.hpp"

#include <stdexcept>

namespace lesicin {

using ad::Matrix;
using ad::Var;

namespace {

// Salt separating evaluation-time sampling from training-time draws.
constexpr std::uint64_t kEvalSampleSalt = 0x5eed0e7a1ULL;

}  // namespace

std::string to_string(StructuralMode m) { return m == StructuralMode::Lookup ? "lookup" : "metapath"; }

StructuralMode structural_mode_from_string(const std::string& s) {
  if (s == "metapath") return StructuralMode::Metapath;
  if (s == "lookup") return StructuralMode::Lookup;
  throw std::invalid_argument("unknown structural encoder \"" + s + "\" (metapath|lookup)");
}

Model::Model(ModelConfig cfg, Vocabulary vocab, StatuteHierarchy hierarchy, HeteroGraph graph,
             const Matrix* pretrained)
    : cfg_(cfg),
      vocab_(std::move(vocab)),
      hierarchy_(std::move(hierarchy)),
      graph_(std::make_unique<HeteroGraph>(std::move(graph))) {
  if (hierarchy_.section_count() == 0) throw std::invalid_argument("Model: hierarchy has no sections");
  for (const auto& s : hierarchy_.sections()) {
    section_grids_.push_back(encode_text(s.sentences, vocab_, cfg_.max_sents, cfg_.max_words));
    if (section_grids_.back().token_count() == 0) {
      throw std::invalid_argument("Model: section " + s.id + " has no text");
    }
    section_nodes_.push_back(graph_->at(NodeType::Section, s.id));
  }

  std::mt19937_64 rng(cfg_.seed);
  HanConfig hc;
  hc.vocab_size = static_cast<int>(vocab_.size());
  hc.emb_dim = cfg_.emb_dim;
  hc.hidden = cfg_.hidden;
  hc.dropout = cfg_.dropout;
  han_ = AttributeEncoder::create(params_, "han", hc, rng, pretrained);

  if (cfg_.structural == StructuralMode::Metapath) {
    StructuralConfig sc;
    sc.hidden = cfg_.hidden;
    sc.node_dim = cfg_.node_dim;
    sc.summary_dim = cfg_.summary_dim;
    sc.instances = cfg_.instances;
    sc.leaky_slope = cfg_.leaky_slope;
    sc.dynamic_context = cfg_.dynamic_context;
    sc.exclude_self = cfg_.exclude_self;
    struct_ = StructuralEncoder::create(params_, "struct", sc, *graph_, default_schemas(), rng);
  } else {
    lookup_ = LookupEncoder::create(params_, "lookup", cfg_.hidden, *graph_, rng);
  }

  ScorerConfig sc;
  sc.hidden = cfg_.hidden;
  sc.score_dim = cfg_.score_dim;
  sc.sections = static_cast<int>(hierarchy_.section_count());
  sc.dynamic_context = cfg_.dynamic_context;
  scorer_ = MatchScorer::create(params_, "scorer", sc, rng);
}

TextGrid Model::grid(const FactDocument& doc) const {
  return encode_text(doc.sentences, vocab_, cfg_.max_sents, cfg_.max_words);
}

Var Model::structural_embeddings(ad::Tape& t, std::span<const NodeId> nodes, Var attr,
                                 std::uint64_t seed) const {
  if (cfg_.structural == StructuralMode::Lookup) return lookup_.encode(t, nodes);
  return struct_.encode(t, nodes, attr, seed);
}

ScoreTriple Model::forward(ad::Tape& t, std::span<const FactDocument* const> facts,
                           std::uint64_t sample_seed, std::mt19937_64* dropout_rng,
                           bool with_structural) const {
  if (facts.empty()) throw std::invalid_argument("Model::forward: empty batch");
  std::vector<TextGrid> grids;
  grids.reserve(facts.size());
  for (const auto* f : facts) grids.push_back(grid(*f));
  std::vector<const TextGrid*> fact_ptrs, sec_ptrs;
  for (const auto& g : grids) fact_ptrs.push_back(&g);
  for (const auto& g : section_grids_) sec_ptrs.push_back(&g);

  Var hf_a = han_.encode(t, fact_ptrs, dropout_rng);
  Var hs_a = han_.encode(t, sec_ptrs, dropout_rng);
  Var hs_s = structural_embeddings(t, section_nodes_, hs_a, derive_seed(sample_seed, 0, 1));

  SectionContext ctx_a = scorer_.prepare(t, hs_a);
  SectionContext ctx_s = scorer_.prepare(t, hs_s);
  ScoreTriple out;
  out.attribute = scorer_.match(t, ctx_a, hf_a);
  out.alignment = scorer_.match(t, ctx_s, hf_a);
  if (with_structural) {
    std::vector<NodeId> nodes;
    nodes.reserve(facts.size());
    for (const auto* f : facts) nodes.push_back(graph_->at(NodeType::Fact, f->id));
    Var hf_s = structural_embeddings(t, nodes, hf_a, derive_seed(sample_seed, 0, 2));
    out.structural = scorer_.match(t, ctx_s, hf_s);
  }
  return out;
}

SectionState Model::section_state() const {
  ad::Tape t;
  std::vector<const TextGrid*> sec_ptrs;
  for (const auto& g : section_grids_) sec_ptrs.push_back(&g);
  Var hs_a = han_.encode(t, sec_ptrs);
  Var hs_s = structural_embeddings(t, section_nodes_, hs_a, derive_seed(cfg_.seed, kEvalSampleSalt, 1));
  SectionContext a = scorer_.prepare(t, hs_a);
  SectionContext s = scorer_.prepare(t, hs_s);
  return {a.contextualized.value(), a.keys.value(), s.contextualized.value(), s.keys.value()};
}

FactScores Model::score_fact(const SectionState& state, const FactDocument& fact) const {
  ad::Tape t;
  TextGrid g = grid(fact);
  const TextGrid* ptr = &g;
  Var hf = han_.encode(t, std::span<const TextGrid* const>(&ptr, 1));
  SectionContext a{t.constant(state.attr_contextualized), t.constant(state.attr_keys)};
  SectionContext s{t.constant(state.struct_contextualized), t.constant(state.struct_keys)};
  FactScores out;
  out.attribute = scorer_.match(t, a, hf).value().col(0);
  out.alignment = scorer_.match(t, s, hf).value().col(0);
  return out;
}

}  // namespace lesicin
