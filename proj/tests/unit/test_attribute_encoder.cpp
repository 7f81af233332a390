#include <gtest/gtest.h>

#include <random>

#include "lesicin/attribute_encoder.hpp"
#include "oracles.hpp"

using namespace lesicin;
using ad::Matrix;
using ad::Tape;

namespace {

// Grid with the given sentences of word ids, padded to (ms x mw).
TextGrid grid(const std::vector<std::vector<int>>& sentences, int ms, int mw) {
  TextGrid g;
  g.max_sents = ms;
  g.max_words = mw;
  g.ids.assign(static_cast<std::size_t>(ms * mw), Vocabulary::kPad);
  g.mask.assign(static_cast<std::size_t>(ms * mw), 0);
  for (std::size_t s = 0; s < sentences.size(); ++s)
    for (std::size_t w = 0; w < sentences[s].size(); ++w) {
      g.ids[s * static_cast<std::size_t>(mw) + w] = sentences[s][w];
      g.mask[s * static_cast<std::size_t>(mw) + w] = 1;
    }
  return g;
}

struct Fixture {
  ad::ParameterStore store;
  AttributeEncoder enc;
  Fixture(int seed = 1) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    enc = AttributeEncoder::create(store, "han", {.vocab_size = 10, .emb_dim = 3, .hidden = 4}, rng);
    // Non-zero biases and wider contexts so every term of the attention matters.
    for (auto* p : store.all()) {
      if (p->name().find(".b") != std::string::npos || p->name().find("ctx") != std::string::npos)
        p->value() = nn::uniform(static_cast<int>(p->value().rows()), static_cast<int>(p->value().cols()), -1.0, 1.0, rng);
    }
  }
  Matrix encode(const std::vector<const TextGrid*>& gs, HanTrace* trace = nullptr) {
    Tape t;
    return enc.encode(t, gs, nullptr, trace).value();
  }
};

}  // namespace

TEST(AttributeEncoder, MatchesScalarOracleOnRaggedBatch) {
  Fixture f;
  std::vector<std::vector<std::vector<int>>> docs{
      {{2, 3, 4}, {5, 6}, {7}},
      {{8, 9, 2, 3}},
      {{4, 4}, {9, 8, 7, 6}},
  };
  std::vector<TextGrid> grids;
  for (const auto& d : docs) grids.push_back(grid(d, 3, 4));
  std::vector<const TextGrid*> ptrs;
  for (const auto& g : grids) ptrs.push_back(&g);
  HanTrace trace;
  Matrix got = f.encode(ptrs, &trace);
  ASSERT_EQ(got.rows(), 4);
  ASSERT_EQ(got.cols(), 3);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto want = oracle::han(f.enc, docs[d]);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(got(i, static_cast<Eigen::Index>(d)), want.doc[static_cast<std::size_t>(i)], 1e-12);
    ASSERT_EQ(trace.sentence_alpha[d].size(), static_cast<Eigen::Index>(docs[d].size()));
    for (std::size_t s = 0; s < docs[d].size(); ++s) {
      EXPECT_NEAR(trace.sentence_alpha[d](static_cast<Eigen::Index>(s)), want.sentence_alpha[s], 1e-12);
      for (std::size_t w = 0; w < docs[d][s].size(); ++w)
        EXPECT_NEAR(trace.word_alpha[d](static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(s)), want.word_alpha[s][w], 1e-12);
    }
  }
}

TEST(AttributeEncoder, SingletonSentenceGetsFullWeight) {
  Fixture f;
  TextGrid g = grid({{2, 3, 4}}, 2, 5);
  HanTrace trace;
  f.encode({&g}, &trace);
  ASSERT_EQ(trace.sentence_alpha[0].size(), 1);
  EXPECT_DOUBLE_EQ(trace.sentence_alpha[0](0), 1.0);
  EXPECT_NEAR(trace.word_alpha[0].col(0).sum(), 1.0, 1e-15);
  EXPECT_EQ(trace.word_alpha[0](3, 0), 0.0);
}

TEST(AttributeEncoder, ZeroSentenceContextSplitsWeightEvenly) {
  Fixture f;
  f.enc.sentence_context().value().setZero();
  TextGrid g = grid({{5, 6, 7}, {5, 6, 7}}, 2, 3);
  HanTrace trace;
  Matrix doc = f.encode({&g}, &trace);
  EXPECT_DOUBLE_EQ(trace.sentence_alpha[0](0), 0.5);
  EXPECT_DOUBLE_EQ(trace.sentence_alpha[0](1), 0.5);
  // Identical sentences share word weights.
  EXPECT_LT((trace.word_alpha[0].col(0) - trace.word_alpha[0].col(1)).cwiseAbs().maxCoeff(), 1e-15);
  auto want = oracle::han(f.enc, {{5, 6, 7}, {5, 6, 7}});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(doc(i, 0), want.doc[static_cast<std::size_t>(i)], 1e-12);
}

TEST(AttributeEncoder, PaddingAndBatchCompositionDoNotChangeEmbeddings) {
  Fixture f;
  TextGrid small = grid({{2, 3}, {4}}, 2, 2);
  TextGrid big = grid({{2, 3}, {4}}, 6, 7);
  Matrix a = f.encode({&small});
  Matrix b = f.encode({&big});
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-13);
  TextGrid other = grid({{9, 9, 9, 9, 9, 9, 9}, {8}, {7}, {6, 5}}, 6, 7);
  Matrix c = f.encode({&other, &big});
  EXPECT_LT((c.col(1) - b.col(0)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(AttributeEncoder, EmptySentencesInsideTheGridAreSkipped) {
  Fixture f;
  TextGrid gapped = grid({{2, 3}, {}, {4}}, 3, 3);
  TextGrid dense = grid({{2, 3}, {4}}, 3, 3);
  EXPECT_LT((f.encode({&gapped}) - f.encode({&dense})).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(AttributeEncoder, RejectsDocumentsWithoutTokens) {
  Fixture f;
  TextGrid empty = grid({}, 2, 3);
  TextGrid ok = grid({{2}}, 2, 3);
  EXPECT_THROW(f.encode({&ok, &empty}), std::invalid_argument);
  TextGrid wide = grid({{2}}, 2, 4);
  EXPECT_THROW(f.encode({&ok, &wide}), std::invalid_argument);
  ad::ParameterStore s;
  std::mt19937_64 rng(1);
  EXPECT_THROW(AttributeEncoder::create(s, "odd", {.vocab_size = 10, .emb_dim = 3, .hidden = 3}, rng),
               std::invalid_argument);
}

TEST(AttributeEncoder, PadEmbeddingIsZeroAndPretrainedTableIsUsed) {
  ad::ParameterStore s;
  std::mt19937_64 rng(2);
  Matrix table = Matrix::Constant(3, 10, 0.25);
  auto enc = AttributeEncoder::create(s, "han", {.vocab_size = 10, .emb_dim = 3, .hidden = 4}, rng, &table);
  EXPECT_EQ(enc.embedding().value().col(Vocabulary::kPad).norm(), 0.0);
  EXPECT_EQ(enc.embedding().value()(1, 5), 0.25);
  Matrix wrong = Matrix::Zero(4, 10);
  ad::ParameterStore s2;
  EXPECT_THROW(AttributeEncoder::create(s2, "han", {.vocab_size = 10, .emb_dim = 3, .hidden = 4}, rng, &wrong),
               std::invalid_argument);
}

TEST(AttributeEncoder, DropoutOnlyWithRng) {
  Fixture f;
  TextGrid g = grid({{2, 3}, {4, 5}}, 2, 2);
  std::vector<const TextGrid*> ptrs{&g};
  Tape t1, t2;
  std::mt19937_64 rng(3);
  Matrix plain = f.enc.encode(t1, ptrs).value();
  Matrix dropped = f.enc.encode(t2, ptrs, &rng).value();
  EXPECT_GT((plain - dropped).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(plain, f.encode(ptrs));
}

TEST(AttributeEncoder, GradientsMatchFiniteDifferences) {
  Fixture f;
  TextGrid g1 = grid({{2, 3, 4}, {5}}, 2, 3);
  TextGrid g2 = grid({{6, 7}}, 2, 3);
  std::vector<const TextGrid*> ptrs{&g1, &g2};
  std::mt19937_64 rng(4);
  Matrix w = nn::uniform(4, 2, -1.0, 1.0, rng);
  auto r = oracle::check_gradients(f.store, [&](Tape& t) {
    return ad::sum_all(ad::mul(f.enc.encode(t, ptrs), t.constant(w)));
  }, 1e-6, 1e-4, 16);
  // Floor 1e-4: some entries have gradients near 1e-6 where central
  // differences carry ~1e-11 of round-off.
  EXPECT_LT(r.max_rel, 1e-6) << r.worst;
}
