#include "lesicin/pipeline.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lesicin {

void apply_desk_scale(ModelConfig& m) {
  m.emb_dim = 16;
  m.hidden = 16;
  m.node_dim = 16;
  m.summary_dim = 16;
  m.score_dim = 16;
  m.max_sents = 8;
  m.max_words = 16;
}

void apply_ablation(const std::string& name, ModelConfig& m, TrainConfig& t) {
  if (name == "full") return;
  if (name == "E") {
    m.structural = StructuralMode::Lookup;
  } else if (name == "S") {
    t.theta[1] = 0.0;
  } else if (name == "V") {
    t.scheme = WeightScheme::VWS;
  } else {
    throw std::invalid_argument("unknown ablation \"" + name + "\" (full|E|S|V)");
  }
}

RunConfig::Resolved RunConfig::resolve() const {
  Resolved r;
  ModelConfig& m = r.model;
  TrainConfig& t = r.train;
  if (desk_scale) apply_desk_scale(m);
  if (hidden > 0) m.hidden = m.node_dim = m.summary_dim = m.score_dim = hidden;
  if (emb_dim > 0) m.emb_dim = emb_dim;
  if (max_sents > 0) m.max_sents = max_sents;
  if (max_words > 0) m.max_words = max_words;
  m.instances = instances;
  m.dropout = dropout;
  m.exclude_self = exclude_self_edges;
  m.dynamic_context = !static_context;
  m.structural = structural_mode_from_string(structural);
  m.seed = seed;

  t.theta = {theta_a, theta_s, theta_l};
  t.lambda_a = lambda_a;
  t.lambda_l = lambda_l;
  if (tau) t.tau = *tau;
  t.tune_tau = tune_tau && !tau;
  t.eta = eta;
  t.lr = lr ? *lr : (desk_scale ? 1e-2 : 1e-3);
  t.batch_size = batch_size;
  t.epochs = epochs;
  t.seed = seed;
  t.scheme = weight_scheme_from_string(scheme);
  apply_ablation(ablation, m, t);
  t.validate();
  return r;
}

std::string describe(const RunConfig& run, const RunConfig::Resolved& r) {
  std::ostringstream out;
  out.precision(17);
  const ModelConfig& m = r.model;
  const TrainConfig& t = r.train;
  out << "seed = " << run.seed << "\n"
      << "out_dir = " << run.out_dir << "\n"
      << "ablation = " << run.ablation << "\n"
      << "desk_scale = " << (run.desk_scale ? "true" : "false") << "\n"
      << "theta_a = " << t.theta[0] << "\n"
      << "theta_s = " << t.theta[1] << "\n"
      << "theta_l = " << t.theta[2] << "\n"
      << "lambda_a = " << t.lambda_a << "\n"
      << "lambda_l = " << t.lambda_l << "\n"
      << "tau = " << t.tau << "\n"
      << "tune_tau = " << (t.tune_tau ? "true" : "false") << "\n"
      << "eta = " << t.eta << "\n"
      << "lr = " << t.lr << "\n"
      << "batch_size = " << t.batch_size << "\n"
      << "epochs = " << t.epochs << "\n"
      << "scheme = " << to_string(t.scheme) << "\n"
      << "instances = " << m.instances << "\n"
      << "exclude_self_edges = " << (m.exclude_self ? "true" : "false") << "\n"
      << "static_context = " << (m.dynamic_context ? "false" : "true") << "\n"
      << "structural = " << to_string(m.structural) << "\n"
      << "emb_dim = " << m.emb_dim << "\n"
      << "hidden = " << m.hidden << "\n"
      << "node_dim = " << m.node_dim << "\n"
      << "summary_dim = " << m.summary_dim << "\n"
      << "score_dim = " << m.score_dim << "\n"
      << "max_sents = " << m.max_sents << "\n"
      << "max_words = " << m.max_words << "\n"
      << "dropout = " << m.dropout << "\n"
      << "min_freq = " << run.min_freq << "\n";
  return out.str();
}

PreparedData prepare_data(std::span<const FactDocument> docs, const StatuteHierarchy& hierarchy,
                          const SplitSpec& split, std::size_t min_freq) {
  SplitResult folds = iterative_stratified_split(docs, split);
  static const char* kNames[3] = {"train", "val", "test"};
  PreparedData out;
  std::vector<FactDocument>* dst[3] = {&out.train, &out.val, &out.test};
  for (int j = 0; j < 3; ++j) {
    for (auto& d : folds.folds[j]) {
      d.split = kNames[j];
      dst[j]->push_back(std::move(d));
    }
  }
  auto streams = token_streams(out.train, &hierarchy);
  out.vocab = build_vocab(streams, min_freq);
  out.graph = build_citation_graph(out.train, hierarchy);
  return out;
}

std::unique_ptr<Model> make_model(const PreparedData& data, const StatuteHierarchy& hierarchy,
                                  const ModelConfig& cfg) {
  return std::make_unique<Model>(cfg, data.vocab, hierarchy, data.graph);
}

std::vector<LabelSet> top_k_baseline(std::span<const FactDocument> train, std::size_t n_docs,
                                     const StatuteHierarchy& hierarchy, std::size_t k) {
  auto freqs = section_frequencies(train, hierarchy);
  std::vector<int> order(freqs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return freqs[static_cast<std::size_t>(a)] > freqs[static_cast<std::size_t>(b)];
  });
  LabelSet top(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(k, order.size())));
  std::sort(top.begin(), top.end());
  return std::vector<LabelSet>(n_docs, top);
}

}  // namespace lesicin
