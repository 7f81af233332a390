#pragma once

// Scalar reference implementations used as test oracles. Everything here is
// written with explicit loops over plain vectors so that it shares no code
// path with the library's matrix kernels or autodiff tape.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "lesicin/attribute_encoder.hpp"
#include "lesicin/autodiff.hpp"
#include "lesicin/corpus.hpp"
#include "lesicin/match_scorer.hpp"
#include "lesicin/nn.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;  // row major: m[i][j]

inline Mat to_mat(const Eigen::MatrixXd& m) {
  Mat out(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}
inline Vec col(const Eigen::MatrixXd& m, Eigen::Index j) {
  Vec v(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) v[i] = m(i, j);
  return v;
}
inline Vec col(const Mat& m, std::size_t j) {
  Vec v(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) v[i] = m[i][j];
  return v;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec matvec(const Mat& A, const Vec& x) {
  Vec y(A.size(), 0.0);
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += A[i][j] * x[j];
  return y;
}
inline Vec plus(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}
inline Vec times(Vec a, double s) {
  for (double& x : a) x *= s;
  return a;
}
inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline Vec concat(const Vec& a, const Vec& b) {
  Vec out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}
inline Vec softmax(const Vec& e) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : e) m = std::max(m, x);
  Vec out(e.size());
  double z = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) z += out[i] = std::exp(e[i] - m);
  for (double& x : out) x /= z;
  return out;
}
inline Vec weighted_sum(const std::vector<Vec>& hs, const Vec& alpha) {
  Vec out(hs.empty() ? 0 : hs[0].size(), 0.0);
  for (std::size_t k = 0; k < hs.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha[k] * hs[k][i];
  return out;
}

// ---- recurrent cells ----------------------------------------------------

struct Gru {
  Mat W, U;
  Vec bx, bh;
  int H = 0;
  explicit Gru(const lesicin::nn::GruCell& c)
      : W(to_mat(c.W->value())), U(to_mat(c.U->value())), bx(col(c.bx->value(), 0)),
        bh(col(c.bh->value(), 0)), H(c.hidden) {}
  Vec step(const Vec& x, const Vec& h) const {
    Vec gx = plus(matvec(W, x), bx), gh = plus(matvec(U, h), bh);
    Vec out(H);
    for (int i = 0; i < H; ++i) {
      double r = sigmoid(gx[i] + gh[i]);
      double z = sigmoid(gx[H + i] + gh[H + i]);
      double n = std::tanh(gx[2 * H + i] + r * gh[2 * H + i]);
      out[i] = (1.0 - z) * n + z * h[i];
    }
    return out;
  }
};

struct Lstm {
  Mat W, U;
  Vec bx, bh;
  int H = 0;
  explicit Lstm(const lesicin::nn::LstmCell& c)
      : W(to_mat(c.W->value())), U(to_mat(c.U->value())), bx(col(c.bx->value(), 0)),
        bh(col(c.bh->value(), 0)), H(c.hidden) {}
  void step(const Vec& x, Vec& h, Vec& c) const {
    Vec g = plus(plus(matvec(W, x), bx), plus(matvec(U, h), bh));
    for (int k = 0; k < H; ++k) {
      double i = sigmoid(g[k]), f = sigmoid(g[H + k]), gg = std::tanh(g[2 * H + k]),
             o = sigmoid(g[3 * H + k]);
      c[k] = f * c[k] + i * gg;
      h[k] = o * std::tanh(c[k]);
    }
  }
};

// Bidirectional GRU over an unpadded sequence: [forward; backward] per step.
inline std::vector<Vec> bigru(const Gru& fw, const Gru& bw, const std::vector<Vec>& xs) {
  const std::size_t T = xs.size();
  std::vector<Vec> f(T), b(T), out(T);
  Vec h(fw.H, 0.0);
  for (std::size_t t = 0; t < T; ++t) f[t] = h = fw.step(xs[t], h);
  h.assign(bw.H, 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    std::size_t t = T - 1 - k;
    b[t] = h = bw.step(xs[t], h);
  }
  for (std::size_t t = 0; t < T; ++t) out[t] = concat(f[t], b[t]);
  return out;
}

inline std::vector<Vec> bilstm(const Lstm& fw, const Lstm& bw, const std::vector<Vec>& xs) {
  const std::size_t T = xs.size();
  std::vector<Vec> f(T), b(T), out(T);
  Vec h(fw.H, 0.0), c(fw.H, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    fw.step(xs[t], h, c);
    f[t] = h;
  }
  h.assign(bw.H, 0.0);
  c.assign(bw.H, 0.0);
  for (std::size_t k = 0; k < T; ++k) {
    std::size_t t = T - 1 - k;
    bw.step(xs[t], h, c);
    b[t] = h;
  }
  for (std::size_t t = 0; t < T; ++t) out[t] = concat(f[t], b[t]);
  return out;
}

// ---- hierarchical attention encoder -------------------------------------

struct HanResult {
  Vec doc;
  std::vector<Vec> word_alpha;  // per real sentence, over its real words
  Vec sentence_alpha;
};

// Pools hs with ctx . tanh(Wp h + bp) attention.
inline Vec attend(const std::vector<Vec>& hs, const Mat& Wp, const Vec& bp, const Vec& ctx,
                  Vec* alpha_out) {
  Vec e(hs.size());
  for (std::size_t t = 0; t < hs.size(); ++t) {
    Vec u = plus(matvec(Wp, hs[t]), bp);
    for (double& x : u) x = std::tanh(x);
    e[t] = dot(ctx, u);
  }
  Vec a = softmax(e);
  if (alpha_out) *alpha_out = a;
  return weighted_sum(hs, a);
}

// Encodes one document given only its real tokens: sentences[s][w] are
// vocabulary ids. Padding never enters the recurrences here, so agreement
// with the batched masked implementation checks the masking as well.
inline HanResult han(const lesicin::AttributeEncoder& enc,
                     const std::vector<std::vector<int>>& sentences) {
  Mat emb = to_mat(enc.embedding().value());
  Gru wf(enc.word_gru().fw), wb(enc.word_gru().bw), sf(enc.sentence_gru().fw),
      sb(enc.sentence_gru().bw);
  Mat wp = to_mat(enc.word_proj().W->value()), sp = to_mat(enc.sentence_proj().W->value());
  Vec wpb = col(enc.word_proj().b->value(), 0), spb = col(enc.sentence_proj().b->value(), 0);
  Vec wctx = col(enc.word_context().value(), 0), sctx = col(enc.sentence_context().value(), 0);

  HanResult r;
  std::vector<Vec> sent_vecs;
  for (const auto& words : sentences) {
    std::vector<Vec> xs;
    for (int id : words) xs.push_back(col(emb, static_cast<std::size_t>(id)));
    Vec alpha;
    sent_vecs.push_back(attend(bigru(wf, wb, xs), wp, wpb, wctx, &alpha));
    r.word_alpha.push_back(alpha);
  }
  r.doc = attend(bigru(sf, sb, sent_vecs), sp, spb, sctx, &r.sentence_alpha);
  return r;
}

// ---- structural aggregation ----------------------------------------------

// q_0 = h_0, q_i = h_i + q_{i-1} * r_i, result q_M / (M + 1).
inline Vec rotate(const std::vector<Vec>& h, const std::vector<Vec>& r) {
  Vec q = h[0];
  for (std::size_t i = 1; i < h.size(); ++i)
    for (std::size_t k = 0; k < q.size(); ++k) q[k] = h[i][k] + q[k] * r[i - 1][k];
  return times(q, 1.0 / static_cast<double>(h.size()));
}

inline double leaky(double x, double slope) { return x > 0 ? x : slope * x; }

// ReLU(sum alpha_u enc_u), alpha = softmax_u leaky(a . [target ; enc_u]).
inline Vec intra(const Vec& target, const std::vector<Vec>& encs, const Vec& a, double slope,
                 Vec* alpha_out = nullptr) {
  if (encs.empty()) return Vec(target.size(), 0.0);
  Vec e(encs.size());
  for (std::size_t u = 0; u < encs.size(); ++u) e[u] = leaky(dot(a, concat(target, encs[u])), slope);
  Vec alpha = softmax(e);
  if (alpha_out) *alpha_out = alpha;
  Vec out = weighted_sum(encs, alpha);
  for (double& x : out) x = std::max(0.0, x);
  return out;
}

// per_schema[p][v]: embedding of node v under schema p; q[v] node contexts.
inline std::vector<Vec> inter(const std::vector<std::vector<Vec>>& per_schema, const Mat& M,
                              const Vec& b, const std::vector<Vec>& q, Mat* beta_out = nullptr) {
  const std::size_t P = per_schema.size(), n = per_schema[0].size();
  std::vector<Vec> summary(P, Vec(M.size(), 0.0));
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t v = 0; v < n; ++v) {
      Vec u = plus(matvec(M, per_schema[p][v]), b);
      for (std::size_t i = 0; i < u.size(); ++i) summary[p][i] += std::tanh(u[i]) / static_cast<double>(n);
    }
  }
  std::vector<Vec> out(n);
  if (beta_out) beta_out->assign(P, Vec(n));
  for (std::size_t v = 0; v < n; ++v) {
    Vec e(P);
    for (std::size_t p = 0; p < P; ++p) e[p] = dot(summary[p], q[v]);
    Vec beta = softmax(e);
    out[v].assign(per_schema[0][v].size(), 0.0);
    for (std::size_t p = 0; p < P; ++p) {
      if (beta_out) (*beta_out)[p][v] = beta[p];
      for (std::size_t i = 0; i < out[v].size(); ++i) out[v][i] += beta[p] * per_schema[p][v][i];
    }
  }
  return out;
}

// ---- scorer ----------------------------------------------------------------

struct ScorerOut {
  std::vector<Vec> contextualized;
  Vec gamma;
  Vec pooled;
  Vec scores;
};

inline ScorerOut scorer(const lesicin::MatchScorer& s, const std::vector<Vec>& sections,
                        const Vec& fact) {
  ScorerOut r;
  Lstm fw(s.lstm().fw), bw(s.lstm().bw);
  Mat P = to_mat(s.projection().W->value());
  Vec pb = col(s.projection().b->value(), 0);
  for (const Vec& h : bilstm(fw, bw, sections)) r.contextualized.push_back(plus(matvec(P, h), pb));
  Mat M = to_mat(s.M_S().value());
  Vec b = col(s.b_S().value(), 0);
  Vec w = s.config().dynamic_context ? matvec(to_mat(s.context().value()), fact)
                                     : col(s.context().value(), 0);
  Vec e(sections.size());
  for (std::size_t k = 0; k < sections.size(); ++k) {
    Vec u = plus(matvec(M, r.contextualized[k]), b);
    for (double& x : u) x = std::tanh(x);
    e[k] = dot(w, u);
  }
  r.gamma = softmax(e);
  r.pooled = weighted_sum(r.contextualized, r.gamma);
  Vec z = plus(matvec(to_mat(s.W_C().value()), concat(fact, r.pooled)), col(s.b_C().value(), 0));
  for (double& x : z) x = sigmoid(x);
  r.scores = z;
  return r;
}

// ---- losses and weights --------------------------------------------------

// -(1/B) sum_b sum_s [w_s y log o + (1 - y) log(1 - o)] with clamping.
inline double bce(const Mat& o, const Mat& y, const Vec& w, double eps) {
  const std::size_t S = o.size(), B = o[0].size();
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t s = 0; s < S; ++s) {
      double p = std::min(std::max(o[s][b], eps), 1.0 - eps);
      total += w[s] * y[s][b] * std::log(p) + (1.0 - y[s][b]) * std::log(1.0 - p);
    }
  }
  return -total / static_cast<double>(B);
}

inline Vec tws(const std::vector<std::size_t>& f, double eta) {
  double fmax = 0.0;
  for (auto x : f) fmax = std::max(fmax, static_cast<double>(x));
  Vec w(f.size());
  for (std::size_t s = 0; s < f.size(); ++s) w[s] = f[s] == 0 ? eta : std::min(fmax / static_cast<double>(f[s]), eta);
  return w;
}

inline Vec vws(const std::vector<std::size_t>& f, std::size_t n) {
  Vec w(f.size());
  for (std::size_t s = 0; s < f.size(); ++s)
    w[s] = f[s] == 0 ? static_cast<double>(n) : static_cast<double>(n) / static_cast<double>(f[s]);
  return w;
}

// ---- metrics ---------------------------------------------------------------

struct Prf {
  double p = 0.0, r = 0.0, f1 = 0.0;
};

// Counts label by label by scanning every document; percentages.
inline std::vector<Prf> per_label(const std::vector<std::vector<int>>& preds,
                                  const std::vector<std::vector<int>>& golds, int n_labels) {
  std::vector<Prf> out(static_cast<std::size_t>(n_labels));
  for (int l = 0; l < n_labels; ++l) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t d = 0; d < preds.size(); ++d) {
      bool p = std::count(preds[d].begin(), preds[d].end(), l) > 0;
      bool g = std::count(golds[d].begin(), golds[d].end(), l) > 0;
      tp += p && g;
      fp += p && !g;
      fn += !p && g;
    }
    Prf m;
    m.p = tp + fp > 0 ? 100.0 * tp / (tp + fp) : 0.0;
    m.r = tp + fn > 0 ? 100.0 * tp / (tp + fn) : 0.0;
    m.f1 = m.p + m.r > 0 ? 2.0 * m.p * m.r / (m.p + m.r) : 0.0;
    out[static_cast<std::size_t>(l)] = m;
  }
  return out;
}

inline Prf macro(const std::vector<Prf>& table) {
  Prf m;
  for (const auto& x : table) {
    m.p += x.p / static_cast<double>(table.size());
    m.r += x.r / static_cast<double>(table.size());
    m.f1 += x.f1 / static_cast<double>(table.size());
  }
  return m;
}

inline double jaccard(const std::vector<std::vector<int>>& preds,
                      const std::vector<std::vector<int>>& golds) {
  double total = 0.0;
  for (std::size_t d = 0; d < preds.size(); ++d) {
    std::set<int> p(preds[d].begin(), preds[d].end()), g(golds[d].begin(), golds[d].end()), u = p;
    u.insert(g.begin(), g.end());
    std::size_t inter = 0;
    for (int x : p) inter += g.count(x);
    total += u.empty() ? 1.0 : static_cast<double>(inter) / static_cast<double>(u.size());
  }
  return 100.0 * total / static_cast<double>(preds.size());
}

// ---- finite differences -----------------------------------------------------

struct GradCheck {
  double max_rel = 0.0;
  std::string worst;
  std::size_t checked = 0;
};

// Compares tape gradients of `loss` with central differences. Relative error
// is |a - n| / max(|a|, |n|, floor). At most `per_param` entries of each
// parameter are probed, chosen at random.
inline GradCheck check_gradients(lesicin::ad::ParameterStore& store,
                                 const std::function<lesicin::ad::Var(lesicin::ad::Tape&)>& loss,
                                 double h = 1e-5, double floor = 1e-6, int per_param = 12,
                                 std::uint64_t seed = 7) {
  store.zero_grad();
  {
    lesicin::ad::Tape t;
    t.backward(loss(t));
  }
  auto eval = [&] {
    lesicin::ad::Tape t;
    return loss(t).scalar();
  };
  GradCheck r;
  std::mt19937_64 rng(seed);
  for (auto* p : store.all()) {
    const Eigen::Index n = p->size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    if (static_cast<Eigen::Index>(per_param) < n) idx.resize(static_cast<std::size_t>(per_param));
    for (Eigen::Index i : idx) {
      double& x = p->value().data()[i];
      const double keep = x;
      x = keep + h;
      const double up = eval();
      x = keep - h;
      const double down = eval();
      x = keep;
      const double num = (up - down) / (2.0 * h);
      const double ana = p->grad().data()[i];
      const double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), floor});
      ++r.checked;
      if (rel > r.max_rel) {
        r.max_rel = rel;
        std::ostringstream w;
        w << p->name() << "[" << i << "] analytic " << ana << " numeric " << num;
        r.worst = w.str();
      }
    }
  }
  return r;
}

}  // namespace oracle
