#include "lesicin/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace lesicin {

namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "ch", "sh", "tr", "pl"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
constexpr const char* kCourts[] = {"SC", "HC-DEL", "HC-BOM", "HC-MAD"};

class WordMaker {
 public:
  explicit WordMaker(std::mt19937_64& rng) : rng_(rng) {}

  std::string next() {
    std::uniform_int_distribution<int> syl(2, 3), on(0, std::size(kOnsets) - 1), vo(0, std::size(kVowels) - 1);
    for (;;) {
      std::string w;
      int n = syl(rng_);
      for (int i = 0; i < n; ++i) {
        w += kOnsets[on(rng_)];
        w += kVowels[vo(rng_)];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::mt19937_64& rng_;
  std::set<std::string> used_;
};

std::vector<std::string> words(WordMaker& wm, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(wm.next());
  return out;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> u(0, v.size() - 1);
  return v[u(rng)];
}

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& cfg) {
  if (cfg.n_docs < 1 || cfg.n_sections < 1) {
    throw std::invalid_argument("synthetic corpus needs at least one document and one section");
  }
  const int S = cfg.n_sections;
  const int T = std::min(S, cfg.n_topics > 0 ? cfg.n_topics : std::max(1, S / 2));
  const int C = T >= 2 ? 2 : 1;
  std::mt19937_64 rng(cfg.seed);
  WordMaker wm(rng);

  SynthCorpus out;
  auto& h = out.hierarchy;
  h.set_act({"ACT", "synthetic penal code", ""});
  for (int c = 0; c < C; ++c) {
    h.add_chapter({"CH" + std::to_string(c + 1), "chapter " + std::to_string(c + 1), "ACT"});
  }
  std::vector<int> topic_of(static_cast<std::size_t>(S));
  std::vector<std::vector<int>> members(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    h.add_topic({"T" + std::to_string(t + 1), "topic " + std::to_string(t + 1),
                 "CH" + std::to_string(t * C / T + 1)});
  }
  for (int s = 0; s < S; ++s) {
    topic_of[static_cast<std::size_t>(s)] = s * T / S;
    members[static_cast<std::size_t>(s * T / S)].push_back(s);
  }

  std::vector<std::vector<std::string>> topic_words;
  for (int t = 0; t < T; ++t) topic_words.push_back(words(wm, cfg.keywords_per_topic));
  std::vector<std::vector<std::string>> keywords;
  for (int s = 0; s < S; ++s) keywords.push_back(words(wm, cfg.keywords_per_section));
  const auto noise = words(wm, cfg.noise_vocab);

  auto sentence = [&](int focus, double rate, int len) {
    std::bernoulli_distribution kw(rate), topical(0.25);
    Sentence out_s;
    for (int i = 0; i < len; ++i) {
      if (kw(rng)) {
        out_s.push_back(topical(rng) ? pick(topic_words[static_cast<std::size_t>(topic_of[static_cast<std::size_t>(focus)])], rng)
                                     : pick(keywords[static_cast<std::size_t>(focus)], rng));
      } else {
        out_s.push_back(pick(noise, rng));
      }
    }
    return out_s;
  };

  std::uniform_int_distribution<int> len_dist(6, 14);
  for (int s = 0; s < S; ++s) {
    Statute st;
    st.id = std::to_string(101 + s);
    st.parent_topic = "T" + std::to_string(topic_of[static_cast<std::size_t>(s)] + 1);
    st.title = "offence of " + keywords[static_cast<std::size_t>(s)][0];
    for (int k = 0; k < 3; ++k) st.sentences.push_back(sentence(s, 0.6, len_dist(rng)));
    h.add_section(std::move(st));
  }
  h.validate();

  std::vector<double> pop(static_cast<std::size_t>(S));
  for (int s = 0; s < S; ++s) pop[static_cast<std::size_t>(s)] = 1.0 / std::pow(s + 1.0, cfg.skew);
  std::uniform_int_distribution<int> count_dist(1, 4), sents_dist(3, 8);
  std::uniform_int_distribution<std::size_t> court_dist(0, std::size(kCourts) - 1);
  std::bernoulli_distribution same_topic(cfg.same_topic_prob);

  for (int d = 0; d < cfg.n_docs; ++d) {
    const int c = std::min(count_dist(rng), S);
    std::vector<int> cited;
    auto weighted_pick = [&]() {
      std::vector<double> w = pop;
      for (int s : cited) w[static_cast<std::size_t>(s)] = 0.0;
      std::discrete_distribution<int> dd(w.begin(), w.end());
      return dd(rng);
    };
    cited.push_back(weighted_pick());
    while (static_cast<int>(cited.size()) < c) {
      std::vector<int> same;
      for (int s : members[static_cast<std::size_t>(topic_of[static_cast<std::size_t>(cited[0])])]) {
        if (std::find(cited.begin(), cited.end(), s) == cited.end()) same.push_back(s);
      }
      cited.push_back(!same.empty() && same_topic(rng) ? pick(same, rng) : weighted_pick());
    }

    std::vector<int> stated{cited[0]};
    std::bernoulli_distribution implicit(cfg.implicit_rate);
    for (std::size_t k = 1; k < cited.size(); ++k) {
      if (!implicit(rng)) stated.push_back(cited[k]);
    }

    FactDocument doc;
    doc.id = "f" + std::to_string(d + 1);
    doc.court = kCourts[court_dist(rng)];
    const int n_stated = static_cast<int>(stated.size());
    const int n_sents = std::max(sents_dist(rng), n_stated);
    for (int k = 0; k < n_sents; ++k) {
      int focus = k < n_stated ? stated[static_cast<std::size_t>(k)] : pick(stated, rng);
      doc.sentences.push_back(sentence(focus, cfg.keyword_rate, len_dist(rng)));
    }
    std::shuffle(doc.sentences.begin(), doc.sentences.end(), rng);
    for (int s : cited) doc.labels.push_back(std::to_string(101 + s));
    std::sort(doc.labels.begin(), doc.labels.end());
    out.docs.push_back(std::move(doc));
  }
  return out;
}

}  // namespace lesicin
