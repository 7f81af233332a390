#pragma once

// Minimal reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. Values are column
// oriented: a batch of B vectors of dimension d is a d x B matrix.
// Parameters live outside the tape and receive accumulated gradients when
// Tape::backward() runs.

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace lesicin::ad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

class Parameter {
 public:
  Parameter(std::string name, Matrix value);

  const std::string& name() const { return name_; }
  Matrix& value() { return value_; }
  const Matrix& value() const { return value_; }
  Matrix& grad() { return grad_; }
  const Matrix& grad() const { return grad_; }
  Eigen::Index size() const { return value_.size(); }

  void zero_grad() { grad_.setZero(); }

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
};

// Owns parameters in registration order. Pointers handed out stay valid for
// the lifetime of the store.
class ParameterStore {
 public:
  Parameter& add(std::string name, Matrix value);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const;

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  std::size_t scalar_count() const;

  void zero_grad();

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

class Tape;

// Handle to one node of a Tape. Cheap to copy.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }
  bool valid() const { return tape_ != nullptr; }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // One leaf per parameter per tape; repeated calls return the same node.
  Var param(Parameter& p);

  // Registers an op result. `backward` is skipped when no input requires grad.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  int next_id() const { return static_cast<int>(nodes_.size()); }
  const Matrix& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  void accumulate(int id, const Matrix& g);
  template <typename Expr>
  void accumulate_expr(int id, const Expr& g) {
    Node& n = nodes_[id];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to every
  // parameter leaf, adding into Parameter::grad().
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

// ---- elementwise and linear algebra ------------------------------------

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_n(std::span<const Var> xs);

// x (d x n) + b (d x 1) for every column.
Var add_col(Var x, Var b);
// x (d x n) ⊙ r (d x 1) for every column.
Var mul_col(Var x, Var r);
// x (d x n) ⊙ a (1 x n) for every row.
Var mul_row(Var x, Var a);
// x (d x n) ⊙ a (1 x n), a constant.
Var mul_row_const(Var x, const RowVector& a);

Var sigmoid(Var x);
Var tanh(Var x);
Var relu(Var x);
Var leaky_relu(Var x, double slope);

// ---- structural -------------------------------------------------------

Var gather_cols(Var x, std::span<const int> cols);
Var concat_rows(std::span<const Var> xs);
Var concat_cols(std::span<const Var> xs);
Var slice_rows(Var x, Eigen::Index start, Eigen::Index count);
Var slice_cols(Var x, Eigen::Index start, Eigen::Index count);
// Column-wise dot product of two d x n matrices: 1 x n.
Var col_dot(Var a, Var b);
// Mean over columns: d x n -> d x 1.
Var mean_cols(Var x);
Var sum_all(Var x);

// ---- attention --------------------------------------------------------

// Softmax down each column over entries whose mask is nonzero. Masked entries
// get exactly zero weight; a fully masked column yields all zeros.
Var masked_col_softmax(Var e, const Matrix& mask);
// Softmax of a 1 x n row within consecutive segments [offsets[i], offsets[i+1]).
Var segment_softmax(Var e, std::span<const int> offsets);
// Per segment, sum_j alpha_j h_j over its columns: d x n, 1 x n -> d x segments.
// Empty segments produce a zero column.
Var segment_weighted_sum(Var h, Var alpha, std::span<const int> offsets);

// ---- training ---------------------------------------------------------

// Inverted dropout; identity when p == 0.
Var dropout(Var x, double p, std::mt19937_64& rng);

// -(1/B) sum_b sum_s [w_s y log o + (1 - y) log(1 - o)], o clamped to
// [eps, 1 - eps]. scores and targets are |S| x B, weights |S| x 1.
Var weighted_bce(Var scores, const Matrix& targets, const Vector& weights, double eps);

}  // namespace lesicin::ad
