#pragma once

#include <array>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lesicin/autodiff.hpp"
#include "lesicin/graph.hpp"
#include "lesicin/nn.hpp"

namespace lesicin {

struct StructuralConfig {
  int hidden = 200;       // d'
  int node_dim = 200;     // d_A
  int summary_dim = 200;  // d_m
  int instances = 8;      // k per schema
  double leaky_slope = 0.01;
  // Context vectors a_P and q_A generated from attribute embeddings rather
  // than learned directly.
  bool dynamic_context = true;
  bool exclude_self = false;
};

// ---- the three aggregation stages, usable on their own -------------------

// Relational rotation over instances laid out position by position:
// features[i] is d' x I (column j = h' of instance j's i-th node) and
// relations[i-1] the d' x 1 vector for step i. Returns q_M / (M + 1).
ad::Var rotate_instances(std::span<const ad::Var> features, std::span<const ad::Var> relations);

// Intra-schema attention. targets and encodings are d' x I (target feature
// repeated per instance), context is 2d' x I or a single 2d' x 1 column.
// Instances of node j occupy [offsets[j], offsets[j+1]). Nodes without
// instances get a zero column.
ad::Var intra_aggregate(ad::Var targets, ad::Var encodings, ad::Var context,
                        std::span<const int> offsets, double slope,
                        ad::Matrix* alpha_out = nullptr);

// Inter-schema attention over per-schema embeddings (each d' x n). The
// summary of schema P averages tanh(M h^P + b) over the n columns; q is
// d_m x n (one context per node) or d_m x 1 (shared).
ad::Var inter_aggregate(std::span<const ad::Var> per_schema, ad::Var M, ad::Var b, ad::Var q,
                        ad::Matrix* beta_out = nullptr);

struct StructuralTrace {
  // Per schema of the encoded type, in schema order.
  std::vector<std::string> schema_ids;
  std::vector<std::vector<MetapathInstance>> instances;
  std::vector<std::vector<int>> offsets;
  std::vector<ad::Matrix> alpha;  // 1 x I
  ad::Matrix beta;                // schemas x n
};

class StructuralEncoder {
 public:
  StructuralEncoder() = default;
  static StructuralEncoder create(ad::ParameterStore& store, const std::string& name,
                                  const StructuralConfig& cfg, const HeteroGraph& graph,
                                  std::vector<MetapathSchema> schemas, std::mt19937_64& rng);

  // h'_v = W_A X_A[:, v] for each node (d' x n). Throws UnknownNodeError.
  ad::Var node_features(ad::Tape& t, std::span<const NodeId> nodes) const;

  // Rotation encoding of instances that all follow `schema`: d' x I.
  ad::Var encode_instances(ad::Tape& t, const MetapathSchema& schema,
                           std::span<const MetapathInstance> instances) const;

  // Structural embeddings of same-typed targets (d' x n). `attr` holds the
  // targets' attribute embeddings and is read only with dynamic contexts.
  // Instances are drawn with derive_seed(seed, node, schema index).
  ad::Var encode(ad::Tape& t, std::span<const NodeId> targets, ad::Var attr, std::uint64_t seed,
                 StructuralTrace* trace = nullptr) const;

  const StructuralConfig& config() const { return cfg_; }
  const HeteroGraph& graph() const { return *graph_; }
  const std::vector<MetapathSchema>& schemas() const { return schemas_; }
  ad::Parameter& relation(Relation r) const { return *rel_[static_cast<int>(r)]; }

 private:
  StructuralConfig cfg_;
  const HeteroGraph* graph_ = nullptr;
  std::vector<MetapathSchema> schemas_;
  std::array<ad::Parameter*, kNodeTypeCount> X_{};
  std::array<ad::Parameter*, kNodeTypeCount> W_{};
  std::array<ad::Parameter*, kRelationCount> rel_{};
  // Per schema: T_P (2d' x d') when dynamic, a_P (2d' x 1) otherwise.
  std::vector<ad::Parameter*> schema_ctx_;
  // Per target type: M_A, b_A, and T_A (d_m x d') or q_A (d_m x 1).
  std::array<ad::Parameter*, kNodeTypeCount> M_{};
  std::array<ad::Parameter*, kNodeTypeCount> b_{};
  std::array<ad::Parameter*, kNodeTypeCount> type_ctx_{};
};

// Ablation: a trainable embedding per Section and per training Fact.
class LookupEncoder {
 public:
  LookupEncoder() = default;
  static LookupEncoder create(ad::ParameterStore& store, const std::string& name, int hidden,
                              const HeteroGraph& graph, std::mt19937_64& rng);
  // Throws UnknownNodeError for nodes outside the graph.
  ad::Var encode(ad::Tape& t, std::span<const NodeId> targets) const;

 private:
  const HeteroGraph* graph_ = nullptr;
  std::array<ad::Parameter*, kNodeTypeCount> table_{};
};

}  // namespace lesicin
