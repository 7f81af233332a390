#pragma once

#include <random>
#include <string>

#include "lesicin/autodiff.hpp"
#include "lesicin/nn.hpp"

namespace lesicin {

struct ScorerConfig {
  int hidden = 200;     // d'
  int score_dim = 200;  // d_s
  int sections = 100;   // |S|
  // w_S = T_S h_f instead of a learned w_S.
  bool dynamic_context = true;
};

// Section embeddings after the sequence encoder, plus the tanh(M_S C + b_S)
// keys that do not depend on the fact.
struct SectionContext {
  ad::Var contextualized;  // d' x |S|
  ad::Var keys;            // d_s x |S|
};

class MatchScorer {
 public:
  MatchScorer() = default;
  static MatchScorer create(ad::ParameterStore& store, const std::string& name,
                            const ScorerConfig& cfg, std::mt19937_64& rng);

  // Bi-LSTM over the sections in hierarchy order, projected back to d'.
  ad::Var contextualize(ad::Tape& t, ad::Var sections) const;
  SectionContext prepare(ad::Tape& t, ad::Var sections) const;
  // Attention pooling of the sections for each fact column: d' x B.
  ad::Var pool(ad::Tape& t, const SectionContext& ctx, ad::Var facts,
               ad::Matrix* gamma_out = nullptr) const;
  // σ(W_C [h_f; h_S] + b_C): |S| x B.
  ad::Var classify(ad::Tape& t, ad::Var facts, ad::Var pooled) const;
  // pool then classify.
  ad::Var match(ad::Tape& t, const SectionContext& ctx, ad::Var facts,
                ad::Matrix* gamma_out = nullptr) const;

  const ScorerConfig& config() const { return cfg_; }
  const nn::BiLstm& lstm() const { return lstm_; }
  const nn::Linear& projection() const { return proj_; }
  ad::Parameter& M_S() const { return *M_; }
  ad::Parameter& b_S() const { return *b_; }
  ad::Parameter& context() const { return *ctx_; }
  ad::Parameter& W_C() const { return *Wc_; }
  ad::Parameter& b_C() const { return *bc_; }

 private:
  ScorerConfig cfg_;
  nn::BiLstm lstm_;
  nn::Linear proj_;
  ad::Parameter* M_ = nullptr;
  ad::Parameter* b_ = nullptr;
  ad::Parameter* ctx_ = nullptr;  // T_S (d_s x d') or w_S (d_s x 1)
  ad::Parameter* Wc_ = nullptr;
  ad::Parameter* bc_ = nullptr;
};

}  // namespace lesicin
