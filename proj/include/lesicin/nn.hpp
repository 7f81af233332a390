#pragma once

// Recurrent and affine building blocks shared by the encoders and the scorer.

#include <random>
#include <string>
#include <vector>

#include "lesicin/autodiff.hpp"

namespace lesicin::nn {

using ad::Matrix;
using ad::Parameter;
using ad::ParameterStore;
using ad::Tape;
using ad::Var;

Matrix xavier_uniform(int rows, int cols, std::mt19937_64& rng);
Matrix uniform(int rows, int cols, double lo, double hi, std::mt19937_64& rng);

// y = W x + b.
struct Linear {
  Parameter* W = nullptr;
  Parameter* b = nullptr;

  static Linear create(ParameterStore& store, const std::string& name, int in, int out,
                       std::mt19937_64& rng, bool bias = true);
  Var operator()(Tape& t, Var x) const;
};

// Gate layout follows the usual (r, z, n) stacking:
//   r = σ(W_r x + b_xr + U_r h + b_hr)
//   z = σ(W_z x + b_xz + U_z h + b_hz)
//   n = tanh(W_n x + b_xn + r ⊙ (U_n h + b_hn))
//   h' = (1 - z) ⊙ n + z ⊙ h
struct GruCell {
  Parameter* W = nullptr;   // 3h x in
  Parameter* U = nullptr;   // 3h x h
  Parameter* bx = nullptr;  // 3h x 1
  Parameter* bh = nullptr;  // 3h x 1
  int hidden = 0;

  static GruCell create(ParameterStore& store, const std::string& name, int in, int hidden,
                        std::mt19937_64& rng);
  Var step(Tape& t, Var x, Var h) const;
};

// (i, f, g, o) stacking:
//   c' = σ(f) ⊙ c + σ(i) ⊙ tanh(g);  h' = σ(o) ⊙ tanh(c')
struct LstmCell {
  Parameter* W = nullptr;   // 4h x in
  Parameter* U = nullptr;   // 4h x h
  Parameter* bx = nullptr;  // 4h x 1
  Parameter* bh = nullptr;  // 4h x 1
  int hidden = 0;

  static LstmCell create(ParameterStore& store, const std::string& name, int in, int hidden,
                         std::mt19937_64& rng);
  // Returns (h', c').
  std::pair<Var, Var> step(Tape& t, Var x, Var h, Var c) const;
};

// Runs a GRU over xs[0..T). masks[t] (1 x B) freezes the state of padded
// columns: h_t = h_{t-1} + m_t ⊙ (cell(x_t, h_{t-1}) - h_{t-1}). Outputs are
// in input order for both directions.
std::vector<Var> run_gru(Tape& t, const GruCell& cell, const std::vector<Var>& xs,
                         const std::vector<ad::RowVector>& masks, bool reverse);

// Bidirectional GRU; each output is [forward; backward] (2h x B).
struct BiGru {
  GruCell fw;
  GruCell bw;

  static BiGru create(ParameterStore& store, const std::string& name, int in, int hidden,
                      std::mt19937_64& rng);
  std::vector<Var> operator()(Tape& t, const std::vector<Var>& xs,
                              const std::vector<ad::RowVector>& masks) const;
};

// Bidirectional LSTM over an unpadded sequence; outputs [forward; backward].
struct BiLstm {
  LstmCell fw;
  LstmCell bw;

  static BiLstm create(ParameterStore& store, const std::string& name, int in, int hidden,
                       std::mt19937_64& rng);
  std::vector<Var> operator()(Tape& t, const std::vector<Var>& xs) const;
};

}  // namespace lesicin::nn
