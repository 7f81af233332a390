#include "lesicin/match_scorer.hpp"

#include <stdexcept>

namespace lesicin {

using ad::Matrix;
using ad::Var;

MatchScorer MatchScorer::create(ad::ParameterStore& store, const std::string& name,
                                const ScorerConfig& cfg, std::mt19937_64& rng) {
  if (cfg.sections < 1) throw std::invalid_argument("MatchScorer: need at least one section");
  MatchScorer s;
  s.cfg_ = cfg;
  const int d = cfg.hidden;
  s.lstm_ = nn::BiLstm::create(store, name + ".lstm", d, d, rng);
  s.proj_ = nn::Linear::create(store, name + ".proj", 2 * d, d, rng);
  s.M_ = &store.add(name + ".M_S", nn::xavier_uniform(cfg.score_dim, d, rng));
  s.b_ = &store.add(name + ".b_S", Matrix::Zero(cfg.score_dim, 1));
  s.ctx_ = &store.add(name + ".w_S", cfg.dynamic_context
                                         ? nn::xavier_uniform(cfg.score_dim, d, rng)
                                         : nn::uniform(cfg.score_dim, 1, -0.1, 0.1, rng));
  s.Wc_ = &store.add(name + ".W_C", nn::xavier_uniform(cfg.sections, 2 * d, rng));
  s.bc_ = &store.add(name + ".b_C", Matrix::Zero(cfg.sections, 1));
  return s;
}

Var MatchScorer::contextualize(ad::Tape& t, Var sections) const {
  std::vector<Var> seq;
  for (Eigen::Index s = 0; s < sections.cols(); ++s) seq.push_back(ad::slice_cols(sections, s, 1));
  auto out = lstm_(t, seq);
  return proj_(t, ad::concat_cols(out));
}

SectionContext MatchScorer::prepare(ad::Tape& t, Var sections) const {
  if (sections.cols() != cfg_.sections) {
    throw std::invalid_argument("MatchScorer: expected one column per section");
  }
  Var c = contextualize(t, sections);
  Var keys = ad::tanh(ad::add_col(ad::matmul(t.param(*M_), c), t.param(*b_)));
  return {c, keys};
}

Var MatchScorer::pool(ad::Tape& t, const SectionContext& ctx, Var facts, Matrix* gamma_out) const {
  Var w = t.param(*ctx_);
  if (cfg_.dynamic_context) {
    w = ad::matmul(w, facts);
  } else if (facts.cols() != 1) {
    w = ad::matmul(w, t.constant(Matrix::Ones(1, facts.cols())));
  }
  Var e = ad::matmul(ad::transpose(ctx.keys), w);
  Var gamma = ad::masked_col_softmax(e, Matrix::Ones(e.rows(), e.cols()));
  if (gamma_out) *gamma_out = gamma.value();
  return ad::matmul(ctx.contextualized, gamma);
}

Var MatchScorer::classify(ad::Tape& t, Var facts, Var pooled) const {
  Var pair[2] = {facts, pooled};
  Var z = ad::add_col(ad::matmul(t.param(*Wc_), ad::concat_rows(pair)), t.param(*bc_));
  return ad::sigmoid(z);
}

Var MatchScorer::match(ad::Tape& t, const SectionContext& ctx, Var facts, Matrix* gamma_out) const {
  return classify(t, facts, pool(t, ctx, facts, gamma_out));
}

}  // namespace lesicin
