#include "lesicin/nn.hpp"

#include <cmath>

namespace lesicin::nn {

Matrix uniform(int rows, int cols, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u(rng);
  }
  return m;
}

Matrix xavier_uniform(int rows, int cols, std::mt19937_64& rng) {
  double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  return uniform(rows, cols, -a, a, rng);
}

Linear Linear::create(ParameterStore& store, const std::string& name, int in, int out,
                      std::mt19937_64& rng, bool bias) {
  Linear l;
  l.W = &store.add(name + ".W", xavier_uniform(out, in, rng));
  if (bias) l.b = &store.add(name + ".b", Matrix::Zero(out, 1));
  return l;
}

Var Linear::operator()(Tape& t, Var x) const {
  Var y = ad::matmul(t.param(*W), x);
  return b ? ad::add_col(y, t.param(*b)) : y;
}

namespace {

// Recurrent weights drawn with the 1/sqrt(hidden) bound.
Matrix recurrent_init(int rows, int cols, int hidden, std::mt19937_64& rng) {
  double a = 1.0 / std::sqrt(static_cast<double>(hidden));
  return uniform(rows, cols, -a, a, rng);
}

}  // namespace

GruCell GruCell::create(ParameterStore& store, const std::string& name, int in, int hidden,
                        std::mt19937_64& rng) {
  GruCell c;
  c.hidden = hidden;
  c.W = &store.add(name + ".W", recurrent_init(3 * hidden, in, hidden, rng));
  c.U = &store.add(name + ".U", recurrent_init(3 * hidden, hidden, hidden, rng));
  c.bx = &store.add(name + ".bx", recurrent_init(3 * hidden, 1, hidden, rng));
  c.bh = &store.add(name + ".bh", recurrent_init(3 * hidden, 1, hidden, rng));
  return c;
}

Var GruCell::step(Tape& t, Var x, Var h) const {
  const int H = hidden;
  Var gx = ad::add_col(ad::matmul(t.param(*W), x), t.param(*bx));
  Var gh = ad::add_col(ad::matmul(t.param(*U), h), t.param(*bh));
  Var r = ad::sigmoid(ad::add(ad::slice_rows(gx, 0, H), ad::slice_rows(gh, 0, H)));
  Var z = ad::sigmoid(ad::add(ad::slice_rows(gx, H, H), ad::slice_rows(gh, H, H)));
  Var n = ad::tanh(ad::add(ad::slice_rows(gx, 2 * H, H), ad::mul(r, ad::slice_rows(gh, 2 * H, H))));
  return ad::add(n, ad::mul(z, ad::sub(h, n)));
}

LstmCell LstmCell::create(ParameterStore& store, const std::string& name, int in, int hidden,
                          std::mt19937_64& rng) {
  LstmCell c;
  c.hidden = hidden;
  c.W = &store.add(name + ".W", recurrent_init(4 * hidden, in, hidden, rng));
  c.U = &store.add(name + ".U", recurrent_init(4 * hidden, hidden, hidden, rng));
  c.bx = &store.add(name + ".bx", recurrent_init(4 * hidden, 1, hidden, rng));
  c.bh = &store.add(name + ".bh", recurrent_init(4 * hidden, 1, hidden, rng));
  return c;
}

std::pair<Var, Var> LstmCell::step(Tape& t, Var x, Var h, Var c) const {
  const int H = hidden;
  Var g = ad::add(ad::add_col(ad::matmul(t.param(*W), x), t.param(*bx)),
                  ad::add_col(ad::matmul(t.param(*U), h), t.param(*bh)));
  Var i = ad::sigmoid(ad::slice_rows(g, 0, H));
  Var f = ad::sigmoid(ad::slice_rows(g, H, H));
  Var gg = ad::tanh(ad::slice_rows(g, 2 * H, H));
  Var o = ad::sigmoid(ad::slice_rows(g, 3 * H, H));
  Var c2 = ad::add(ad::mul(f, c), ad::mul(i, gg));
  Var h2 = ad::mul(o, ad::tanh(c2));
  return {h2, c2};
}

std::vector<Var> run_gru(Tape& t, const GruCell& cell, const std::vector<Var>& xs,
                         const std::vector<ad::RowVector>& masks, bool reverse) {
  const std::size_t T = xs.size();
  std::vector<Var> out(T);
  if (T == 0) return out;
  Var h = t.constant(Matrix::Zero(cell.hidden, xs[0].cols()));
  for (std::size_t k = 0; k < T; ++k) {
    std::size_t s = reverse ? T - 1 - k : k;
    Var next = cell.step(t, xs[s], h);
    h = ad::add(h, ad::mul_row_const(ad::sub(next, h), masks[s]));
    out[s] = h;
  }
  return out;
}

BiGru BiGru::create(ParameterStore& store, const std::string& name, int in, int hidden,
                    std::mt19937_64& rng) {
  return BiGru{GruCell::create(store, name + ".fw", in, hidden, rng),
               GruCell::create(store, name + ".bw", in, hidden, rng)};
}

std::vector<Var> BiGru::operator()(Tape& t, const std::vector<Var>& xs,
                                   const std::vector<ad::RowVector>& masks) const {
  auto f = run_gru(t, fw, xs, masks, false);
  auto b = run_gru(t, bw, xs, masks, true);
  std::vector<Var> out(xs.size());
  for (std::size_t s = 0; s < xs.size(); ++s) {
    Var pair[2] = {f[s], b[s]};
    out[s] = ad::concat_rows(pair);
  }
  return out;
}

BiLstm BiLstm::create(ParameterStore& store, const std::string& name, int in, int hidden,
                      std::mt19937_64& rng) {
  return BiLstm{LstmCell::create(store, name + ".fw", in, hidden, rng),
                LstmCell::create(store, name + ".bw", in, hidden, rng)};
}

std::vector<Var> BiLstm::operator()(Tape& t, const std::vector<Var>& xs) const {
  const std::size_t T = xs.size();
  std::vector<Var> f(T), b(T), out(T);
  if (T == 0) return out;
  const Eigen::Index B = xs[0].cols();
  Var h = t.constant(Matrix::Zero(fw.hidden, B));
  Var c = h;
  for (std::size_t s = 0; s < T; ++s) {
    std::tie(h, c) = fw.step(t, xs[s], h, c);
    f[s] = h;
  }
  h = t.constant(Matrix::Zero(bw.hidden, B));
  c = h;
  for (std::size_t k = 0; k < T; ++k) {
    std::size_t s = T - 1 - k;
    std::tie(h, c) = bw.step(t, xs[s], h, c);
    b[s] = h;
  }
  for (std::size_t s = 0; s < T; ++s) {
    Var pair[2] = {f[s], b[s]};
    out[s] = ad::concat_rows(pair);
  }
  return out;
}

}  // namespace lesicin::nn
