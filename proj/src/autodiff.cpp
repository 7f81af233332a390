#include "lesicin/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lesicin::ad {

Parameter::Parameter(std::string name, Matrix value)
    : name_(std::move(name)), value_(std::move(value)) {
  grad_ = Matrix::Zero(value_.rows(), value_.cols());
}

Parameter& ParameterStore::add(std::string name, Matrix value) {
  if (by_name_.count(name)) {
    throw std::invalid_argument("duplicate parameter name: " + name);
  }
  params_.push_back(std::make_unique<Parameter>(name, std::move(value)));
  Parameter* p = params_.back().get();
  by_name_.emplace(std::move(name), p);
  return *p;
}

Parameter& ParameterStore::get(const std::string& name) {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *it->second;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) throw std::out_of_range("unknown parameter: " + name);
  return *it->second;
}

bool ParameterStore::contains(const std::string& name) const { return by_name_.count(name) > 0; }

std::vector<Parameter*> ParameterStore::all() {
  std::vector<Parameter*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
  std::vector<const Parameter*> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->size());
  return n;
}

void ParameterStore::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr, nullptr, false});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  nodes_.push_back(Node{p.value(), Matrix(), nullptr, &p, true});
  int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var(this, id);
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(backward));
}

Var Tape::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var& v : inputs) {
    if (v.tape() != this) throw std::logic_error("autodiff: mixing tapes");
    needs = needs || nodes_[v.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs ? std::move(backward) : nullptr,
                        nullptr, needs});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& g) { accumulate_expr(id, g); }

void Tape::backward(Var root) {
  if (root.tape() != this) throw std::logic_error("autodiff: root from another tape");
  if (root.rows() != 1 || root.cols() != 1) {
    throw std::invalid_argument("autodiff: backward() needs a scalar root");
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[root.id()].requires_grad) return;
  nodes_[root.id()].grad = Matrix::Ones(1, 1);
  for (int id = root.id(); id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      n.param->grad() += n.grad;
    } else if (n.backward) {
      Matrix g = std::move(n.grad);
      n.backward(*this, g);
    }
  }
}

// ---------------------------------------------------------------------------

namespace {

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string("autodiff ") + op + ": shape mismatch " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("autodiff matmul: inner dimension mismatch");
  }
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.requires_grad(ia)) t.accumulate_expr(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate_expr(ib, t.value(ia).transpose() * g);
  });
}

Var transpose(Var a) {
  Tape& t = *a.tape();
  int ia = a.id();
  return t.record(a.value().transpose(), {a},
                  [ia](Tape& t, const Matrix& g) { t.accumulate_expr(ia, g.transpose()); });
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate_expr(ia, g);
    t.accumulate_expr(ib, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate_expr(ia, g);
    t.accumulate_expr(ib, -g);
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), {a, b},
                  [ia, ib](Tape& t, const Matrix& g) {
                    if (t.requires_grad(ia)) t.accumulate_expr(ia, g.cwiseProduct(t.value(ib)));
                    if (t.requires_grad(ib)) t.accumulate_expr(ib, g.cwiseProduct(t.value(ia)));
                  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape();
  int ia = a.id();
  return t.record(a.value() * s, {a},
                  [ia, s](Tape& t, const Matrix& g) { t.accumulate_expr(ia, g * s); });
}

Var add_n(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("autodiff add_n: empty input");
  Matrix v = xs[0].value();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    require_same_shape(xs[0], xs[i], "add_n");
    v += xs[i].value();
  }
  std::vector<int> ids;
  ids.reserve(xs.size());
  for (const Var& x : xs) ids.push_back(x.id());
  return xs[0].tape()->record(std::move(v), xs, [ids](Tape& t, const Matrix& g) {
    for (int id : ids) t.accumulate_expr(id, g);
  });
}

Var add_col(Var x, Var b) {
  if (b.cols() != 1 || b.rows() != x.rows()) {
    throw std::invalid_argument("autodiff add_col: bias must be rows x 1");
  }
  Tape& t = *x.tape();
  int ix = x.id(), ib = b.id();
  Matrix v = x.value().colwise() + b.value().col(0);
  return t.record(std::move(v), {x, b}, [ix, ib](Tape& t, const Matrix& g) {
    t.accumulate_expr(ix, g);
    if (t.requires_grad(ib)) t.accumulate_expr(ib, g.rowwise().sum());
  });
}

Var mul_col(Var x, Var r) {
  if (r.cols() != 1 || r.rows() != x.rows()) {
    throw std::invalid_argument("autodiff mul_col: vector must be rows x 1");
  }
  Tape& t = *x.tape();
  int ix = x.id(), ir = r.id();
  Matrix v = x.value().array().colwise() * r.value().col(0).array();
  return t.record(std::move(v), {x, r}, [ix, ir](Tape& t, const Matrix& g) {
    if (t.requires_grad(ix)) {
      Matrix gx = g.array().colwise() * t.value(ir).col(0).array();
      t.accumulate_expr(ix, gx);
    }
    if (t.requires_grad(ir)) {
      t.accumulate_expr(ir, g.cwiseProduct(t.value(ix)).rowwise().sum());
    }
  });
}

Var mul_row(Var x, Var a) {
  if (a.rows() != 1 || a.cols() != x.cols()) {
    throw std::invalid_argument("autodiff mul_row: weights must be 1 x cols");
  }
  Tape& t = *x.tape();
  int ix = x.id(), ia = a.id();
  Matrix v = x.value().array().rowwise() * a.value().row(0).array();
  return t.record(std::move(v), {x, a}, [ix, ia](Tape& t, const Matrix& g) {
    if (t.requires_grad(ix)) {
      Matrix gx = g.array().rowwise() * t.value(ia).row(0).array();
      t.accumulate_expr(ix, gx);
    }
    if (t.requires_grad(ia)) {
      t.accumulate_expr(ia, g.cwiseProduct(t.value(ix)).colwise().sum());
    }
  });
}

Var mul_row_const(Var x, const RowVector& a) {
  if (a.size() != x.cols()) {
    throw std::invalid_argument("autodiff mul_row_const: weights must be 1 x cols");
  }
  Tape& t = *x.tape();
  int ix = x.id();
  Matrix v = x.value().array().rowwise() * a.array();
  return t.record(std::move(v), {x}, [ix, a](Tape& t, const Matrix& g) {
    Matrix gx = g.array().rowwise() * a.array();
    t.accumulate_expr(ix, gx);
  });
}

Var sigmoid(Var x) {
  Tape& t = *x.tape();
  Matrix v = x.value().unaryExpr([](double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
  });
  int ix = x.id();
  int io = t.next_id();
  return t.record(std::move(v), {x}, [ix, io](Tape& t, const Matrix& g) {
    const Matrix& s = t.value(io);
    t.accumulate_expr(ix, g.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix())));
  });
}

Var tanh(Var x) {
  Tape& t = *x.tape();
  Matrix v = x.value().array().tanh().matrix();
  int ix = x.id();
  int io = t.next_id();
  return t.record(std::move(v), {x}, [ix, io](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(io);
    t.accumulate_expr(ix, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var relu(Var x) {
  Tape& t = *x.tape();
  int ix = x.id();
  return t.record(x.value().cwiseMax(0.0), {x}, [ix](Tape& t, const Matrix& g) {
    const Matrix& in = t.value(ix);
    t.accumulate_expr(ix, (in.array() > 0.0).select(g, 0.0).matrix());
  });
}

Var leaky_relu(Var x, double slope) {
  Tape& t = *x.tape();
  int ix = x.id();
  Matrix v = x.value().unaryExpr([slope](double z) { return z > 0 ? z : slope * z; });
  return t.record(std::move(v), {x}, [ix, slope](Tape& t, const Matrix& g) {
    const Matrix& in = t.value(ix);
    t.accumulate_expr(ix, (in.array() > 0.0).select(g, slope * g).matrix());
  });
}

Var gather_cols(Var x, std::span<const int> cols) {
  Tape& t = *x.tape();
  const Matrix& src = x.value();
  Matrix v(src.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j] < 0 || cols[j] >= src.cols()) {
      throw std::out_of_range("autodiff gather_cols: column index out of range");
    }
    v.col(static_cast<Eigen::Index>(j)) = src.col(cols[j]);
  }
  int ix = x.id();
  std::vector<int> idx(cols.begin(), cols.end());
  Eigen::Index src_cols = src.cols();
  return t.record(std::move(v), {x}, [ix, idx, src_cols](Tape& t, const Matrix& g) {
    Matrix gx = Matrix::Zero(g.rows(), src_cols);
    for (std::size_t j = 0; j < idx.size(); ++j) gx.col(idx[j]) += g.col(static_cast<Eigen::Index>(j));
    t.accumulate_expr(ix, gx);
  });
}

Var concat_rows(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("autodiff concat_rows: empty input");
  Eigen::Index rows = 0, cols = xs[0].cols();
  for (const Var& x : xs) {
    if (x.cols() != cols) throw std::invalid_argument("autodiff concat_rows: column mismatch");
    rows += x.rows();
  }
  Matrix v(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> parts;
  Eigen::Index at = 0;
  for (const Var& x : xs) {
    v.middleRows(at, x.rows()) = x.value();
    parts.emplace_back(x.id(), at);
    at += x.rows();
  }
  return xs[0].tape()->record(std::move(v), xs, [parts](Tape& t, const Matrix& g) {
    for (auto [id, start] : parts) {
      if (t.requires_grad(id)) t.accumulate_expr(id, g.middleRows(start, t.value(id).rows()));
    }
  });
}

Var concat_cols(std::span<const Var> xs) {
  if (xs.empty()) throw std::invalid_argument("autodiff concat_cols: empty input");
  Eigen::Index rows = xs[0].rows(), cols = 0;
  for (const Var& x : xs) {
    if (x.rows() != rows) throw std::invalid_argument("autodiff concat_cols: row mismatch");
    cols += x.cols();
  }
  Matrix v(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> parts;
  Eigen::Index at = 0;
  for (const Var& x : xs) {
    v.middleCols(at, x.cols()) = x.value();
    parts.emplace_back(x.id(), at);
    at += x.cols();
  }
  return xs[0].tape()->record(std::move(v), xs, [parts](Tape& t, const Matrix& g) {
    for (auto [id, start] : parts) {
      if (t.requires_grad(id)) t.accumulate_expr(id, g.middleCols(start, t.value(id).cols()));
    }
  });
}

Var slice_rows(Var x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.rows()) {
    throw std::out_of_range("autodiff slice_rows: range out of bounds");
  }
  Tape& t = *x.tape();
  int ix = x.id();
  Eigen::Index rows = x.rows();
  return t.record(x.value().middleRows(start, count), {x},
                  [ix, start, rows](Tape& t, const Matrix& g) {
                    Matrix gx = Matrix::Zero(rows, g.cols());
                    gx.middleRows(start, g.rows()) = g;
                    t.accumulate_expr(ix, gx);
                  });
}

Var slice_cols(Var x, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > x.cols()) {
    throw std::out_of_range("autodiff slice_cols: range out of bounds");
  }
  Tape& t = *x.tape();
  int ix = x.id();
  Eigen::Index cols = x.cols();
  return t.record(x.value().middleCols(start, count), {x},
                  [ix, start, cols](Tape& t, const Matrix& g) {
                    Matrix gx = Matrix::Zero(g.rows(), cols);
                    gx.middleCols(start, g.cols()) = g;
                    t.accumulate_expr(ix, gx);
                  });
}

Var col_dot(Var a, Var b) {
  require_same_shape(a, b, "col_dot");
  Tape& t = *a.tape();
  int ia = a.id(), ib = b.id();
  Matrix v = a.value().cwiseProduct(b.value()).colwise().sum();
  return t.record(std::move(v), {a, b}, [ia, ib](Tape& t, const Matrix& g) {
    if (t.requires_grad(ia)) {
      Matrix ga = t.value(ib).array().rowwise() * g.row(0).array();
      t.accumulate_expr(ia, ga);
    }
    if (t.requires_grad(ib)) {
      Matrix gb = t.value(ia).array().rowwise() * g.row(0).array();
      t.accumulate_expr(ib, gb);
    }
  });
}

Var mean_cols(Var x) {
  if (x.cols() == 0) throw std::invalid_argument("autodiff mean_cols: no columns");
  Tape& t = *x.tape();
  int ix = x.id();
  Eigen::Index n = x.cols();
  return t.record(x.value().rowwise().mean(), {x}, [ix, n](Tape& t, const Matrix& g) {
    Matrix gx = g.col(0).replicate(1, n) / static_cast<double>(n);
    t.accumulate_expr(ix, gx);
  });
}

Var sum_all(Var x) {
  Tape& t = *x.tape();
  int ix = x.id();
  Eigen::Index r = x.rows(), c = x.cols();
  Matrix v(1, 1);
  v(0, 0) = x.value().sum();
  return t.record(std::move(v), {x}, [ix, r, c](Tape& t, const Matrix& g) {
    t.accumulate_expr(ix, Matrix::Constant(r, c, g(0, 0)));
  });
}

Var masked_col_softmax(Var e, const Matrix& mask) {
  if (mask.rows() != e.rows() || mask.cols() != e.cols()) {
    throw std::invalid_argument("autodiff masked_col_softmax: mask shape mismatch");
  }
  const Matrix& ev = e.value();
  Matrix p = Matrix::Zero(ev.rows(), ev.cols());
  for (Eigen::Index c = 0; c < ev.cols(); ++c) {
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < ev.rows(); ++r) {
      if (mask(r, c) != 0.0) mx = std::max(mx, ev(r, c));
    }
    if (!std::isfinite(mx)) continue;
    double z = 0.0;
    for (Eigen::Index r = 0; r < ev.rows(); ++r) {
      if (mask(r, c) != 0.0) {
        p(r, c) = std::exp(ev(r, c) - mx);
        z += p(r, c);
      }
    }
    p.col(c) /= z;
  }
  Tape& t = *e.tape();
  int ie = e.id();
  int io = t.next_id();
  return t.record(std::move(p), {e}, [ie, io](Tape& t, const Matrix& g) {
    const Matrix& p = t.value(io);
    // dL/de = p ⊙ (g - sum(p ⊙ g)) per column; masked p are zero.
    RowVector dots = p.cwiseProduct(g).colwise().sum();
    Matrix ge = p.cwiseProduct(g.rowwise() - dots);
    t.accumulate_expr(ie, ge);
  });
}

Var segment_softmax(Var e, std::span<const int> offsets) {
  if (e.rows() != 1) throw std::invalid_argument("autodiff segment_softmax: needs 1 x n");
  if (offsets.empty() || offsets.back() != e.cols()) {
    throw std::invalid_argument("autodiff segment_softmax: offsets must end at n");
  }
  const Matrix& ev = e.value();
  Matrix p(1, ev.cols());
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    int lo = offsets[s], hi = offsets[s + 1];
    if (lo >= hi) continue;
    double mx = ev.block(0, lo, 1, hi - lo).maxCoeff();
    double z = 0.0;
    for (int j = lo; j < hi; ++j) {
      p(0, j) = std::exp(ev(0, j) - mx);
      z += p(0, j);
    }
    for (int j = lo; j < hi; ++j) p(0, j) /= z;
  }
  Tape& t = *e.tape();
  int ie = e.id();
  std::vector<int> offs(offsets.begin(), offsets.end());
  int io = t.next_id();
  return t.record(std::move(p), {e}, [ie, io, offs](Tape& t, const Matrix& g) {
    const Matrix& p = t.value(io);
    Matrix ge(1, p.cols());
    for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
      int lo = offs[s], hi = offs[s + 1];
      double dot = 0.0;
      for (int j = lo; j < hi; ++j) dot += p(0, j) * g(0, j);
      for (int j = lo; j < hi; ++j) ge(0, j) = p(0, j) * (g(0, j) - dot);
    }
    t.accumulate_expr(ie, ge);
  });
}

Var segment_weighted_sum(Var h, Var alpha, std::span<const int> offsets) {
  if (alpha.rows() != 1 || alpha.cols() != h.cols()) {
    throw std::invalid_argument("autodiff segment_weighted_sum: alpha must be 1 x n");
  }
  if (offsets.empty() || offsets.back() != h.cols()) {
    throw std::invalid_argument("autodiff segment_weighted_sum: offsets must end at n");
  }
  const Matrix& hv = h.value();
  const Matrix& av = alpha.value();
  Eigen::Index segs = static_cast<Eigen::Index>(offsets.size()) - 1;
  Matrix v = Matrix::Zero(hv.rows(), segs);
  for (Eigen::Index s = 0; s < segs; ++s) {
    for (int j = offsets[s]; j < offsets[s + 1]; ++j) v.col(s) += av(0, j) * hv.col(j);
  }
  Tape& t = *h.tape();
  int ih = h.id(), ia = alpha.id();
  std::vector<int> offs(offsets.begin(), offsets.end());
  return t.record(std::move(v), {h, alpha}, [ih, ia, offs](Tape& t, const Matrix& g) {
    const Matrix& hv = t.value(ih);
    const Matrix& av = t.value(ia);
    bool gh = t.requires_grad(ih), ga = t.requires_grad(ia);
    Matrix dh = gh ? Matrix::Zero(hv.rows(), hv.cols()) : Matrix();
    Matrix da = ga ? Matrix::Zero(1, hv.cols()) : Matrix();
    for (std::size_t s = 0; s + 1 < offs.size(); ++s) {
      for (int j = offs[s]; j < offs[s + 1]; ++j) {
        if (gh) dh.col(j) = av(0, j) * g.col(static_cast<Eigen::Index>(s));
        if (ga) da(0, j) = hv.col(j).dot(g.col(static_cast<Eigen::Index>(s)));
      }
    }
    if (gh) t.accumulate_expr(ih, dh);
    if (ga) t.accumulate_expr(ia, da);
  });
}

Var dropout(Var x, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw std::invalid_argument("autodiff dropout: p must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  Tape& t = *x.tape();
  int ix = x.id();
  Matrix v = x.value().cwiseProduct(mask);
  return t.record(std::move(v), {x}, [ix, mask](Tape& t, const Matrix& g) {
    t.accumulate_expr(ix, g.cwiseProduct(mask));
  });
}

Var weighted_bce(Var scores, const Matrix& targets, const Vector& weights, double eps) {
  const Matrix& o = scores.value();
  if (targets.rows() != o.rows() || targets.cols() != o.cols()) {
    throw std::invalid_argument("weighted_bce: targets shape mismatch");
  }
  if (weights.size() != o.rows()) throw std::invalid_argument("weighted_bce: weights size");
  if (o.cols() == 0) throw std::invalid_argument("weighted_bce: empty batch");
  const double batch = static_cast<double>(o.cols());
  double total = 0.0;
  for (Eigen::Index b = 0; b < o.cols(); ++b) {
    for (Eigen::Index s = 0; s < o.rows(); ++s) {
      double p = std::clamp(o(s, b), eps, 1.0 - eps);
      double y = targets(s, b);
      total += weights(s) * y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
  }
  Matrix v(1, 1);
  v(0, 0) = -total / batch;
  Tape& t = *scores.tape();
  int io = scores.id();
  return t.record(std::move(v), {scores},
                  [io, targets, weights, eps, batch](Tape& t, const Matrix& g) {
                    const Matrix& o = t.value(io);
                    Matrix go(o.rows(), o.cols());
                    for (Eigen::Index b = 0; b < o.cols(); ++b) {
                      for (Eigen::Index s = 0; s < o.rows(); ++s) {
                        double raw = o(s, b);
                        if (raw < eps || raw > 1.0 - eps) {
                          go(s, b) = 0.0;
                          continue;
                        }
                        double y = targets(s, b);
                        go(s, b) = -(weights(s) * y / raw - (1.0 - y) / (1.0 - raw)) / batch;
                      }
                    }
                    t.accumulate_expr(io, g(0, 0) * go);
                  });
}

}  // namespace lesicin::ad
