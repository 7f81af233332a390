#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lesicin/autodiff.hpp"
#include "lesicin/corpus.hpp"
#include "lesicin/nn.hpp"

namespace lesicin {

struct HanConfig {
  int vocab_size = 2;
  int emb_dim = 200;
  int hidden = 200;  // d'; each direction gets d'/2
  double dropout = 0.5;
};

// Attention weights of the last encode() call, for inspection and tests.
struct HanTrace {
  // Per document: one (words x sentences) matrix of word weights and one
  // vector of sentence weights, restricted to the document's real sentences.
  std::vector<ad::Matrix> word_alpha;
  std::vector<ad::Vector> sentence_alpha;
};

class AttributeEncoder {
 public:
  AttributeEncoder() = default;
  // `pretrained`, when given, must be emb_dim x vocab_size.
  static AttributeEncoder create(ad::ParameterStore& store, const std::string& name,
                                 const HanConfig& cfg, std::mt19937_64& rng,
                                 const ad::Matrix* pretrained = nullptr);

  // One d' column per grid. Dropout runs only when `dropout_rng` is set.
  // Throws std::invalid_argument for a grid without any token.
  ad::Var encode(ad::Tape& t, std::span<const TextGrid* const> grids,
                 std::mt19937_64* dropout_rng = nullptr, HanTrace* trace = nullptr) const;

  const HanConfig& config() const { return cfg_; }
  ad::Parameter& embedding() const { return *emb_; }
  const nn::BiGru& word_gru() const { return word_gru_; }
  const nn::BiGru& sentence_gru() const { return sent_gru_; }
  const nn::Linear& word_proj() const { return word_proj_; }
  const nn::Linear& sentence_proj() const { return sent_proj_; }
  ad::Parameter& word_context() const { return *word_ctx_; }
  ad::Parameter& sentence_context() const { return *sent_ctx_; }

 private:
  // Attention pooling over steps: sum_t alpha_t h_t with alpha a masked
  // softmax over ctx . tanh(W h_t + b).
  ad::Var attend(ad::Tape& t, const std::vector<ad::Var>& hs, const ad::Matrix& mask,
                 const nn::Linear& proj, ad::Parameter& ctx, ad::Matrix* alpha_out) const;

  HanConfig cfg_;
  ad::Parameter* emb_ = nullptr;
  nn::BiGru word_gru_;
  nn::Linear word_proj_;
  ad::Parameter* word_ctx_ = nullptr;
  nn::BiGru sent_gru_;
  nn::Linear sent_proj_;
  ad::Parameter* sent_ctx_ = nullptr;
};

}  // namespace lesicin
