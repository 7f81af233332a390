#include "lesicin/structural_encoder.hpp"

#include <stdexcept>

namespace lesicin {

using ad::Matrix;
using ad::Var;

Var rotate_instances(std::span<const Var> features, std::span<const Var> relations) {
  if (features.size() != relations.size() + 1) {
    throw std::invalid_argument("rotate_instances: need one more position than relations");
  }
  Var q = features[0];
  for (std::size_t i = 1; i < features.size(); ++i) {
    q = ad::add(features[i], ad::mul_col(q, relations[i - 1]));
  }
  return ad::scale(q, 1.0 / static_cast<double>(features.size()));
}

Var intra_aggregate(Var targets, Var encodings, Var context, std::span<const int> offsets,
                    double slope, Matrix* alpha_out) {
  Var pair[2] = {targets, encodings};
  Var cat = ad::concat_rows(pair);
  Var e = context.cols() == 1 ? ad::matmul(ad::transpose(context), cat) : ad::col_dot(context, cat);
  Var alpha = ad::segment_softmax(ad::leaky_relu(e, slope), offsets);
  if (alpha_out) *alpha_out = alpha.value();
  return ad::relu(ad::segment_weighted_sum(encodings, alpha, offsets));
}

Var inter_aggregate(std::span<const Var> per_schema, Var M, Var b, Var q, Matrix* beta_out) {
  if (per_schema.empty()) throw std::invalid_argument("inter_aggregate: no schemas");
  ad::Tape& t = *per_schema[0].tape();
  const Eigen::Index n = per_schema[0].cols();
  std::vector<Var> scores;
  for (const Var& h : per_schema) {
    Var s = ad::mean_cols(ad::tanh(ad::add_col(ad::matmul(M, h), b)));
    Var e = ad::matmul(ad::transpose(s), q);
    if (e.cols() != n) e = ad::matmul(e, t.constant(Matrix::Ones(1, n)));
    scores.push_back(e);
  }
  Var beta = ad::masked_col_softmax(ad::concat_rows(scores),
                                    Matrix::Ones(static_cast<Eigen::Index>(per_schema.size()), n));
  if (beta_out) *beta_out = beta.value();
  std::vector<Var> terms;
  for (std::size_t p = 0; p < per_schema.size(); ++p) {
    terms.push_back(ad::mul_row(per_schema[p], ad::slice_rows(beta, static_cast<Eigen::Index>(p), 1)));
  }
  return ad::add_n(terms);
}

StructuralEncoder StructuralEncoder::create(ad::ParameterStore& store, const std::string& name,
                                            const StructuralConfig& cfg, const HeteroGraph& graph,
                                            std::vector<MetapathSchema> schemas,
                                            std::mt19937_64& rng) {
  StructuralEncoder e;
  e.cfg_ = cfg;
  e.graph_ = &graph;
  e.schemas_ = std::move(schemas);
  const int d = cfg.hidden;
  for (int ti = 0; ti < kNodeTypeCount; ++ti) {
    std::string code(1, node_type_code(static_cast<NodeType>(ti)));
    int n = static_cast<int>(graph.count(static_cast<NodeType>(ti)));
    e.X_[ti] = &store.add(name + ".X." + code, nn::uniform(cfg.node_dim, n, -0.1, 0.1, rng));
    e.W_[ti] = &store.add(name + ".W." + code, nn::xavier_uniform(d, cfg.node_dim, rng));
  }
  for (int r = 0; r < kRelationCount; ++r) {
    std::string rn(relation_name(static_cast<Relation>(r)));
    e.rel_[r] = &store.add(name + ".rel." + rn, nn::uniform(d, 1, 0.9, 1.1, rng));
  }
  std::array<bool, kNodeTypeCount> targets{};
  for (const auto& p : e.schemas_) {
    p.validate();
    targets[static_cast<int>(p.target_type())] = true;
    Matrix ctx = cfg.dynamic_context ? nn::xavier_uniform(2 * d, d, rng)
                                     : nn::uniform(2 * d, 1, -0.1, 0.1, rng);
    e.schema_ctx_.push_back(&store.add(name + ".ctx." + p.id, std::move(ctx)));
  }
  for (int ti = 0; ti < kNodeTypeCount; ++ti) {
    if (!targets[ti]) continue;
    std::string code(1, node_type_code(static_cast<NodeType>(ti)));
    e.M_[ti] = &store.add(name + ".M." + code, nn::xavier_uniform(cfg.summary_dim, d, rng));
    e.b_[ti] = &store.add(name + ".b." + code, Matrix::Zero(cfg.summary_dim, 1));
    Matrix q = cfg.dynamic_context ? nn::xavier_uniform(cfg.summary_dim, d, rng)
                                   : nn::uniform(cfg.summary_dim, 1, -0.1, 0.1, rng);
    e.type_ctx_[ti] = &store.add(name + ".q." + code, std::move(q));
  }
  return e;
}

Var StructuralEncoder::node_features(ad::Tape& t, std::span<const NodeId> nodes) const {
  if (nodes.empty()) throw std::invalid_argument("node_features: no nodes");
  const int ti = static_cast<int>(graph_->type(nodes[0]));
  std::vector<int> cols;
  cols.reserve(nodes.size());
  for (NodeId v : nodes) {
    if (static_cast<int>(graph_->type(v)) != ti) {
      throw std::invalid_argument("node_features: nodes must share one type");
    }
    cols.push_back(static_cast<int>(graph_->local_index(v)));
  }
  return ad::matmul(t.param(*W_[ti]), ad::gather_cols(t.param(*X_[ti]), cols));
}

Var StructuralEncoder::encode_instances(ad::Tape& t, const MetapathSchema& schema,
                                        std::span<const MetapathInstance> instances) const {
  const std::size_t M = schema.length();
  std::vector<Var> feats;
  std::vector<NodeId> column(instances.size());
  for (std::size_t i = 0; i <= M; ++i) {
    for (std::size_t j = 0; j < instances.size(); ++j) column[j] = instances[j].nodes.at(i);
    feats.push_back(node_features(t, column));
  }
  std::vector<Var> rels;
  for (Relation r : schema.relations) rels.push_back(t.param(*rel_[static_cast<int>(r)]));
  return rotate_instances(feats, rels);
}

Var StructuralEncoder::encode(ad::Tape& t, std::span<const NodeId> targets, Var attr,
                              std::uint64_t seed, StructuralTrace* trace) const {
  if (targets.empty()) throw std::invalid_argument("StructuralEncoder::encode: no targets");
  const NodeType type = graph_->type(targets[0]);
  const int ti = static_cast<int>(type);
  if (!M_[ti]) throw std::invalid_argument("StructuralEncoder::encode: no schema targets this type");
  const int d = cfg_.hidden;
  const auto n = static_cast<Eigen::Index>(targets.size());
  if (cfg_.dynamic_context && (!attr.valid() || attr.cols() != n)) {
    throw std::invalid_argument("StructuralEncoder::encode: dynamic contexts need attribute embeddings");
  }

  Var target_feats = node_features(t, targets);
  SamplingOptions opts;
  opts.exclude_self = cfg_.exclude_self;
  if (trace) *trace = StructuralTrace{};

  std::vector<Var> per_schema;
  for (std::size_t p = 0; p < schemas_.size(); ++p) {
    const MetapathSchema& schema = schemas_[p];
    if (schema.target_type() != type) continue;
    std::vector<MetapathInstance> insts;
    std::vector<int> offsets{0};
    std::vector<int> owner;
    for (std::size_t j = 0; j < targets.size(); ++j) {
      auto drawn = sample_instances(*graph_, targets[j], schema, cfg_.instances,
                                    derive_seed(seed, targets[j], p), opts);
      for (auto& inst : drawn) {
        insts.push_back(std::move(inst));
        owner.push_back(static_cast<int>(j));
      }
      offsets.push_back(static_cast<int>(insts.size()));
    }
    Var h;
    Matrix alpha;
    if (insts.empty()) {
      h = t.constant(Matrix::Zero(d, n));
    } else {
      Var enc = encode_instances(t, schema, insts);
      Var tf = ad::gather_cols(target_feats, owner);
      Var ctx = t.param(*schema_ctx_[p]);
      if (cfg_.dynamic_context) ctx = ad::gather_cols(ad::matmul(ctx, attr), owner);
      h = intra_aggregate(tf, enc, ctx, offsets, cfg_.leaky_slope, trace ? &alpha : nullptr);
    }
    per_schema.push_back(h);
    if (trace) {
      trace->schema_ids.push_back(schema.id);
      trace->instances.push_back(std::move(insts));
      trace->offsets.push_back(std::move(offsets));
      trace->alpha.push_back(std::move(alpha));
    }
  }
  Var q = t.param(*type_ctx_[ti]);
  if (cfg_.dynamic_context) q = ad::matmul(q, attr);
  return inter_aggregate(per_schema, t.param(*M_[ti]), t.param(*b_[ti]), q,
                         trace ? &trace->beta : nullptr);
}

LookupEncoder LookupEncoder::create(ad::ParameterStore& store, const std::string& name, int hidden,
                                    const HeteroGraph& graph, std::mt19937_64& rng) {
  LookupEncoder e;
  e.graph_ = &graph;
  for (NodeType type : {NodeType::Section, NodeType::Fact}) {
    int ti = static_cast<int>(type);
    std::string code(1, node_type_code(type));
    int n = static_cast<int>(graph.count(type));
    e.table_[ti] = &store.add(name + ".table." + code, nn::uniform(hidden, n, -0.1, 0.1, rng));
  }
  return e;
}

Var LookupEncoder::encode(ad::Tape& t, std::span<const NodeId> targets) const {
  if (targets.empty()) throw std::invalid_argument("LookupEncoder::encode: no targets");
  const int ti = static_cast<int>(graph_->type(targets[0]));
  if (!table_[ti]) throw std::invalid_argument("LookupEncoder::encode: unsupported node type");
  std::vector<int> cols;
  for (NodeId v : targets) {
    if (static_cast<int>(graph_->type(v)) != ti) {
      throw std::invalid_argument("LookupEncoder::encode: targets must share one type");
    }
    cols.push_back(static_cast<int>(graph_->local_index(v)));
  }
  return ad::gather_cols(t.param(*table_[ti]), cols);
}

}  // namespace lesicin
