#include "lesicin/attribute_encoder.hpp"

#include <stdexcept>

namespace lesicin {

using ad::Matrix;
using ad::Var;

AttributeEncoder AttributeEncoder::create(ad::ParameterStore& store, const std::string& name,
                                          const HanConfig& cfg, std::mt19937_64& rng,
                                          const Matrix* pretrained) {
  if (cfg.hidden < 2 || cfg.hidden % 2 != 0) {
    throw std::invalid_argument("HAN hidden size must be even and >= 2");
  }
  AttributeEncoder e;
  e.cfg_ = cfg;
  Matrix table;
  if (pretrained) {
    if (pretrained->rows() != cfg.emb_dim || pretrained->cols() != cfg.vocab_size) {
      throw std::invalid_argument("pretrained table shape does not match vocabulary");
    }
    table = *pretrained;
  } else {
    table = nn::uniform(cfg.emb_dim, cfg.vocab_size, -0.1, 0.1, rng);
  }
  table.col(Vocabulary::kPad).setZero();
  e.emb_ = &store.add(name + ".emb", std::move(table));
  const int half = cfg.hidden / 2;
  e.word_gru_ = nn::BiGru::create(store, name + ".word_gru", cfg.emb_dim, half, rng);
  e.word_proj_ = nn::Linear::create(store, name + ".word_att", cfg.hidden, cfg.hidden, rng);
  e.word_ctx_ = &store.add(name + ".word_ctx", nn::uniform(cfg.hidden, 1, -0.1, 0.1, rng));
  e.sent_gru_ = nn::BiGru::create(store, name + ".sent_gru", cfg.hidden, half, rng);
  e.sent_proj_ = nn::Linear::create(store, name + ".sent_att", cfg.hidden, cfg.hidden, rng);
  e.sent_ctx_ = &store.add(name + ".sent_ctx", nn::uniform(cfg.hidden, 1, -0.1, 0.1, rng));
  return e;
}

Var AttributeEncoder::attend(ad::Tape& t, const std::vector<Var>& hs, const Matrix& mask,
                             const nn::Linear& proj, ad::Parameter& ctx, Matrix* alpha_out) const {
  Var ctx_row = ad::transpose(t.param(ctx));
  std::vector<Var> scores;
  scores.reserve(hs.size());
  for (const Var& h : hs) scores.push_back(ad::matmul(ctx_row, ad::tanh(proj(t, h))));
  Var alpha = ad::masked_col_softmax(ad::concat_rows(scores), mask);
  if (alpha_out) *alpha_out = alpha.value();
  std::vector<Var> terms;
  terms.reserve(hs.size());
  for (std::size_t s = 0; s < hs.size(); ++s) {
    terms.push_back(ad::mul_row(hs[s], ad::slice_rows(alpha, static_cast<Eigen::Index>(s), 1)));
  }
  return ad::add_n(terms);
}

Var AttributeEncoder::encode(ad::Tape& t, std::span<const TextGrid* const> grids,
                             std::mt19937_64* dropout_rng, HanTrace* trace) const {
  if (grids.empty()) throw std::invalid_argument("AttributeEncoder::encode: no documents");
  const int D = static_cast<int>(grids.size());
  const int W = grids[0]->max_words;

  // Flatten the real sentences of every document into word-level columns.
  struct Ref {
    int doc;
    int row;
  };
  std::vector<Ref> sents;
  std::vector<std::vector<int>> doc_sents(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    const TextGrid& g = *grids[static_cast<std::size_t>(d)];
    if (g.max_words != W) throw std::invalid_argument("AttributeEncoder::encode: mixed grid widths");
    for (int s = 0; s < g.max_sents; ++s) {
      if (g.sentence_length(s) == 0) continue;
      doc_sents[static_cast<std::size_t>(d)].push_back(static_cast<int>(sents.size()));
      sents.push_back({d, s});
    }
    if (doc_sents[static_cast<std::size_t>(d)].empty()) {
      throw std::invalid_argument("AttributeEncoder::encode: document has no tokens");
    }
  }
  const int N = static_cast<int>(sents.size());

  Var emb = t.param(*emb_);
  std::vector<Var> xs;
  std::vector<ad::RowVector> masks;
  Matrix word_mask(W, N);
  std::vector<int> ids(static_cast<std::size_t>(N));
  for (int w = 0; w < W; ++w) {
    ad::RowVector m(N);
    for (int n = 0; n < N; ++n) {
      const TextGrid& g = *grids[static_cast<std::size_t>(sents[static_cast<std::size_t>(n)].doc)];
      int row = sents[static_cast<std::size_t>(n)].row;
      ids[static_cast<std::size_t>(n)] = g.at(row, w);
      m(n) = g.real(row, w) ? 1.0 : 0.0;
    }
    word_mask.row(w) = m;
    masks.push_back(m);
    xs.push_back(ad::gather_cols(emb, ids));
  }
  Matrix word_alpha;
  Var sent_vecs = attend(t, word_gru_(t, xs, masks), word_mask, word_proj_, *word_ctx_,
                         trace ? &word_alpha : nullptr);
  if (dropout_rng) sent_vecs = ad::dropout(sent_vecs, cfg_.dropout, *dropout_rng);

  // Sentence level: column N of the extended matrix is an all-zero pad.
  Var pad = t.constant(Matrix::Zero(cfg_.hidden, 1));
  Var pair[2] = {sent_vecs, pad};
  Var ext = ad::concat_cols(pair);
  int S = 0;
  for (const auto& ds : doc_sents) S = std::max(S, static_cast<int>(ds.size()));
  std::vector<Var> ys;
  std::vector<ad::RowVector> smasks;
  Matrix sent_mask(S, D);
  std::vector<int> idx(static_cast<std::size_t>(D));
  for (int s = 0; s < S; ++s) {
    ad::RowVector m(D);
    for (int d = 0; d < D; ++d) {
      const auto& ds = doc_sents[static_cast<std::size_t>(d)];
      bool real = s < static_cast<int>(ds.size());
      idx[static_cast<std::size_t>(d)] = real ? ds[static_cast<std::size_t>(s)] : N;
      m(d) = real ? 1.0 : 0.0;
    }
    sent_mask.row(s) = m;
    smasks.push_back(m);
    ys.push_back(ad::gather_cols(ext, idx));
  }
  Matrix sent_alpha;
  Var docs = attend(t, sent_gru_(t, ys, smasks), sent_mask, sent_proj_, *sent_ctx_,
                    trace ? &sent_alpha : nullptr);
  if (dropout_rng) docs = ad::dropout(docs, cfg_.dropout, *dropout_rng);

  if (trace) {
    trace->word_alpha.clear();
    trace->sentence_alpha.clear();
    for (int d = 0; d < D; ++d) {
      const auto& ds = doc_sents[static_cast<std::size_t>(d)];
      Matrix wa(W, static_cast<Eigen::Index>(ds.size()));
      for (std::size_t k = 0; k < ds.size(); ++k) wa.col(static_cast<Eigen::Index>(k)) = word_alpha.col(ds[k]);
      trace->word_alpha.push_back(std::move(wa));
      trace->sentence_alpha.push_back(
          sent_alpha.col(d).head(static_cast<Eigen::Index>(ds.size())));
    }
  }
  return docs;
}

}  // namespace lesicin
