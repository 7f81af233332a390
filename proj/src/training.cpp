#include "lesicin/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lesicin {

using ad::Matrix;
using ad::Var;
using ad::Vector;
using nlohmann::json;

std::string to_string(WeightScheme w) { return w == WeightScheme::VWS ? "vws" : "tws"; }

WeightScheme weight_scheme_from_string(const std::string& s) {
  if (s == "tws" || s == "TWS") return WeightScheme::TWS;
  if (s == "vws" || s == "VWS") return WeightScheme::VWS;
  throw std::invalid_argument("unknown weighting scheme \"" + s + "\" (tws|vws)");
}

void TrainConfig::validate() const {
  for (double t : theta) {
    if (!(t >= 0.0)) throw std::invalid_argument("loss weights theta must be non-negative");
  }
  if (!(lambda_a >= 0.0) || !(lambda_l >= 0.0) || !(lambda_a + lambda_l > 0.0)) {
    throw std::invalid_argument("score mix lambda must be non-negative with a positive sum");
  }
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (!(eta >= 1.0)) throw std::invalid_argument("eta must be >= 1");
  if (!(lr >= 1e-6 && lr <= 1e-2)) throw std::invalid_argument("learning rate must lie in [1e-6, 1e-2]");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 0.5)");
}

// ---------------------------------------------------------------------------
// weights and losses

std::vector<std::size_t> section_frequencies(std::span<const FactDocument> docs,
                                             const StatuteHierarchy& hierarchy) {
  std::vector<std::size_t> f(hierarchy.section_count(), 0);
  for (const auto& d : docs) {
    for (const auto& l : d.labels) {
      if (auto i = hierarchy.section_index(l)) ++f[*i];
    }
  }
  return f;
}

Vector class_weights_tws(std::span<const std::size_t> freqs, double eta) {
  if (!(eta >= 1.0)) throw std::invalid_argument("eta must be >= 1");
  std::size_t fmax = 0;
  for (auto f : freqs) fmax = std::max(fmax, f);
  Vector w(static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t s = 0; s < freqs.size(); ++s) {
    w(static_cast<Eigen::Index>(s)) =
        freqs[s] == 0 ? eta
                      : std::min(static_cast<double>(fmax) / static_cast<double>(freqs[s]), eta);
  }
  return w;
}

Vector class_weights_vws(std::span<const std::size_t> freqs, std::size_t n_docs) {
  Vector w(static_cast<Eigen::Index>(freqs.size()));
  for (std::size_t s = 0; s < freqs.size(); ++s) {
    w(static_cast<Eigen::Index>(s)) =
        freqs[s] == 0 ? static_cast<double>(n_docs)
                      : static_cast<double>(n_docs) / static_cast<double>(freqs[s]);
  }
  return w;
}

Matrix label_targets(std::span<const FactDocument* const> facts, const StatuteHierarchy& hierarchy) {
  Matrix y = Matrix::Zero(static_cast<Eigen::Index>(hierarchy.section_count()),
                          static_cast<Eigen::Index>(facts.size()));
  for (std::size_t b = 0; b < facts.size(); ++b) {
    for (const auto& l : facts[b]->labels) {
      if (auto i = hierarchy.section_index(l)) {
        y(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(b)) = 1.0;
      }
    }
  }
  return y;
}

Var combined_loss(Var la, std::optional<Var> ls, Var ll, const std::array<double, 3>& theta) {
  std::vector<Var> terms{ad::scale(la, theta[0]), ad::scale(ll, theta[2])};
  if (ls && theta[1] != 0.0) terms.push_back(ad::scale(*ls, theta[1]));
  return ad::add_n(terms);
}

Adam::Adam(std::vector<ad::Parameter*> params, double lr) : params_(std::move(params)), lr_(lr) {
  for (auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value().rows(), p->value().cols()));
    v_.push_back(Matrix::Zero(p->value().rows(), p->value().cols()));
  }
}

void Adam::step() {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Matrix& g = params_[i]->grad();
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g.cwiseProduct(g);
    params_[i]->value().array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
  }
}

// ---------------------------------------------------------------------------
// training

std::string EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["loss"] = loss;
  j["loss_a"] = loss_a;
  j["loss_s"] = loss_s;
  j["loss_l"] = loss_l;
  j["val_macro_f1"] = val_macro_f1;
  return j.dump();
}

BatchLoss batch_loss(ad::Tape& t, const Model& model, std::span<const FactDocument* const> batch,
                     const Vector& weights, const TrainConfig& cfg, std::uint64_t sample_seed,
                     std::mt19937_64* dropout_rng) {
  const bool structural = cfg.theta[1] != 0.0;
  ScoreTriple s = model.forward(t, batch, sample_seed, dropout_rng, structural);
  Matrix y = label_targets(batch, model.hierarchy());
  BatchLoss out;
  Var la = ad::weighted_bce(s.attribute, y, weights, cfg.eps);
  Var ll = ad::weighted_bce(s.alignment, y, weights, cfg.eps);
  std::optional<Var> ls;
  if (s.structural) {
    ls = ad::weighted_bce(*s.structural, y, weights, cfg.eps);
    out.loss_s = ls->scalar();
  }
  out.loss_a = la.scalar();
  out.loss_l = ll.scalar();
  out.total = combined_loss(la, ls, ll, cfg.theta);
  return out;
}

namespace {

std::vector<LabelSet> golds_of(std::span<const FactDocument> docs, const StatuteHierarchy& h) {
  std::vector<LabelSet> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(gold_labels(d, h));
  return out;
}

std::vector<LabelSet> threshold_all(const Matrix& combined, double tau) {
  std::vector<LabelSet> out;
  for (Eigen::Index c = 0; c < combined.cols(); ++c) out.push_back(threshold(combined.col(c), tau));
  return out;
}

}  // namespace

TrainResult train(Model& model, std::span<const FactDocument> train_docs,
                  std::span<const FactDocument> val_docs, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  cfg.validate();
  if (train_docs.empty()) throw std::invalid_argument("train: no training documents");
  const auto& h = model.hierarchy();
  const auto freqs = section_frequencies(train_docs, h);
  const Vector weights = cfg.scheme == WeightScheme::TWS ? class_weights_tws(freqs, cfg.eta)
                                                         : class_weights_vws(freqs, train_docs.size());
  const auto universe = h.section_ids();
  const auto val_golds = golds_of(val_docs, h);
  const auto grid = default_tau_grid();

  std::mt19937_64 order_rng(derive_seed(cfg.seed, 0x0de5, 0));
  std::mt19937_64 dropout_rng(derive_seed(cfg.seed, 0xd0, 0));
  Adam opt(model.params().all(), cfg.lr);
  model.params().zero_grad();

  std::vector<std::size_t> order(train_docs.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.tau = cfg.tau;
  result.best_val_macro_f1 = -1.0;
  std::vector<Matrix> best;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    EpochLog log;
    log.epoch = epoch;
    int batches = 0;
    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const FactDocument*> batch;
      for (std::size_t i = at; i < end; ++i) batch.push_back(&train_docs[order[i]]);
      ad::Tape tape;
      BatchLoss bl = batch_loss(tape, model, batch, weights, cfg,
                                derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch), at),
                                &dropout_rng);
      const double total = bl.total.scalar();
      if (!std::isfinite(total)) {
        std::ostringstream msg;
        msg << "training diverged: non-finite loss at epoch " << epoch << ", batch "
            << batches + 1 << " (L_a " << bl.loss_a << ", L_s " << bl.loss_s << ", L_l "
            << bl.loss_l << ")";
        throw TrainingDiverged(msg.str());
      }
      tape.backward(bl.total);
      opt.step();
      model.params().zero_grad();
      log.loss += total;
      log.loss_a += bl.loss_a;
      log.loss_s += bl.loss_s;
      log.loss_l += bl.loss_l;
      ++batches;
    }
    log.loss /= batches;
    log.loss_a /= batches;
    log.loss_s /= batches;
    log.loss_l /= batches;

    double epoch_tau = cfg.tau;
    if (!val_docs.empty()) {
      Matrix combined = score_documents(model, val_docs, cfg.lambda_a, cfg.lambda_l);
      if (cfg.tune_tau) epoch_tau = tune_threshold(combined, val_golds, universe, grid);
      log.val_macro_f1 = macro_prf(threshold_all(combined, epoch_tau), val_golds, universe).f1;
    }
    // Without validation data the last epoch wins.
    bool better = val_docs.empty() || log.val_macro_f1 > result.best_val_macro_f1;
    if (better) {
      result.best_epoch = epoch;
      result.best_val_macro_f1 = log.val_macro_f1;
      result.tau = epoch_tau;
      best.clear();
      for (const auto* p : std::as_const(model.params()).all()) best.push_back(p->value());
    }
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  auto params = model.params().all();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = best[i];
  return result;
}

// ---------------------------------------------------------------------------
// inference

Predictor::Predictor(const Model& model) : model_(&model), state_(model.section_state()) {}

Vector Predictor::combined_scores(const FactDocument& fact, double lambda_a, double lambda_l) const {
  FactScores s = model_->score_fact(state_, fact);
  return lambda_a * s.attribute + lambda_l * s.alignment;
}

Prediction Predictor::predict(const FactDocument& fact, double lambda_a, double lambda_l,
                              double tau) const {
  Prediction p;
  p.combined = combined_scores(fact, lambda_a, lambda_l);
  p.labels = threshold(p.combined, tau);
  return p;
}

LabelSet threshold(const Vector& combined, double tau) {
  LabelSet out;
  for (Eigen::Index s = 0; s < combined.size(); ++s) {
    if (combined(s) >= tau) out.push_back(static_cast<int>(s));
  }
  return out;
}

LabelSet gold_labels(const FactDocument& doc, const StatuteHierarchy& hierarchy) {
  LabelSet out;
  for (const auto& l : doc.labels) {
    if (auto i = hierarchy.section_index(l)) out.push_back(static_cast<int>(*i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix score_documents(const Model& model, std::span<const FactDocument> docs, double lambda_a,
                       double lambda_l) {
  Predictor pred(model);
  Matrix out(static_cast<Eigen::Index>(model.section_count()), static_cast<Eigen::Index>(docs.size()));
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = pred.combined_scores(docs[i], lambda_a, lambda_l);
  }
  return out;
}

std::vector<double> default_tau_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
  return g;
}

double tune_threshold(const Matrix& combined, std::span<const LabelSet> golds,
                      std::span<const std::string> universe, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("tune_threshold: empty grid");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  double best_tau = sorted.front();
  double best_f1 = -1.0;
  for (double tau : sorted) {
    double f1 = macro_prf(threshold_all(combined, tau), golds, universe).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_tau = tau;
    }
  }
  return best_tau;
}

Evaluation evaluate_model(const Model& model, std::span<const FactDocument> docs, double lambda_a,
                          double lambda_l, double tau) {
  Evaluation ev;
  ev.combined = score_documents(model, docs, lambda_a, lambda_l);
  ev.predictions = threshold_all(ev.combined, tau);
  ev.golds = golds_of(docs, model.hierarchy());
  std::vector<std::string> courts;
  for (const auto& d : docs) courts.push_back(d.court);
  const auto universe = model.hierarchy().section_ids();
  ev.report = build_report(ev.predictions, ev.golds, courts, universe);
  return ev;
}

// ---------------------------------------------------------------------------
// checkpoints

namespace {

json model_config_json(const ModelConfig& c) {
  return {{"emb_dim", c.emb_dim},         {"hidden", c.hidden},
          {"node_dim", c.node_dim},       {"summary_dim", c.summary_dim},
          {"score_dim", c.score_dim},     {"max_sents", c.max_sents},
          {"max_words", c.max_words},     {"instances", c.instances},
          {"dropout", c.dropout},         {"leaky_slope", c.leaky_slope},
          {"dynamic_context", c.dynamic_context},
          {"exclude_self", c.exclude_self},
          {"structural", to_string(c.structural)},
          {"seed", c.seed}};
}

ModelConfig model_config_from(const json& j) {
  ModelConfig c;
  c.emb_dim = j.at("emb_dim");
  c.hidden = j.at("hidden");
  c.node_dim = j.at("node_dim");
  c.summary_dim = j.at("summary_dim");
  c.score_dim = j.at("score_dim");
  c.max_sents = j.at("max_sents");
  c.max_words = j.at("max_words");
  c.instances = j.at("instances");
  c.dropout = j.at("dropout");
  c.leaky_slope = j.at("leaky_slope");
  c.dynamic_context = j.at("dynamic_context");
  c.exclude_self = j.at("exclude_self");
  c.structural = structural_mode_from_string(j.at("structural"));
  c.seed = j.at("seed");
  return c;
}

json train_config_json(const TrainConfig& c) {
  return {{"theta", c.theta},       {"lambda_a", c.lambda_a}, {"lambda_l", c.lambda_l},
          {"tau", c.tau},           {"eta", c.eta},           {"lr", c.lr},
          {"batch_size", c.batch_size}, {"epochs", c.epochs}, {"seed", c.seed},
          {"scheme", to_string(c.scheme)}, {"tune_tau", c.tune_tau}, {"eps", c.eps}};
}

TrainConfig train_config_from(const json& j) {
  TrainConfig c;
  c.theta = j.at("theta").get<std::array<double, 3>>();
  c.lambda_a = j.at("lambda_a");
  c.lambda_l = j.at("lambda_l");
  c.tau = j.at("tau");
  c.eta = j.at("eta");
  c.lr = j.at("lr");
  c.batch_size = j.at("batch_size");
  c.epochs = j.at("epochs");
  c.seed = j.at("seed");
  c.scheme = weight_scheme_from_string(j.at("scheme"));
  c.tune_tau = j.at("tune_tau");
  c.eps = j.at("eps");
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainConfig& train,
                     const TrainResult& result) {
  json j;
  j["format_version"] = kCheckpointFormatVersion;
  j["model_config"] = model_config_json(model.config());
  j["train_config"] = train_config_json(train);
  j["best_epoch"] = result.best_epoch;
  j["best_val_macro_f1"] = result.best_val_macro_f1;
  j["tau"] = result.tau;
  json vocab = json::array();
  for (std::size_t i = 0; i < model.vocab().size(); ++i) {
    vocab.push_back({model.vocab().token(static_cast<int>(i)),
                     model.vocab().frequency(static_cast<int>(i))});
  }
  j["vocabulary"] = std::move(vocab);
  j["hierarchy"] = json::parse(hierarchy_to_json(model.hierarchy()));
  j["graph"] = json::parse(model.graph().to_json());
  json params = json::array();
  for (const auto* p : model.params().all()) {
    std::vector<double> data(p->value().data(), p->value().data() + p->value().size());
    params.push_back({{"name", p->name()},
                      {"rows", p->value().rows()},
                      {"cols", p->value().cols()},
                      {"data", std::move(data)}});
  }
  j["parameters"] = std::move(params);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  json j = json::parse(in);
  if (j.value("format_version", 0) != kCheckpointFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format in " + path.string());
  }
  Vocabulary vocab;
  const auto& v = j.at("vocabulary");
  for (std::size_t i = 2; i < v.size(); ++i) {
    vocab.add(v[i].at(0).get<std::string>(), v[i].at(1).get<std::size_t>());
  }
  StatuteHierarchy hierarchy = parse_hierarchy(j.at("hierarchy").dump());
  HeteroGraph graph = HeteroGraph::from_json(j.at("graph").dump());

  Checkpoint ck;
  ck.model = std::make_unique<Model>(model_config_from(j.at("model_config")), std::move(vocab),
                                     std::move(hierarchy), std::move(graph));
  ck.train = train_config_from(j.at("train_config"));
  ck.best_epoch = j.at("best_epoch");
  ck.best_val_macro_f1 = j.at("best_val_macro_f1");
  ck.tau = j.at("tau");
  auto& store = ck.model->params();
  std::size_t loaded = 0;
  for (const auto& p : j.at("parameters")) {
    const std::string name = p.at("name");
    if (!store.contains(name)) throw std::runtime_error("checkpoint has unknown parameter " + name);
    ad::Parameter& dst = store.get(name);
    const auto rows = p.at("rows").get<Eigen::Index>(), cols = p.at("cols").get<Eigen::Index>();
    if (dst.value().rows() != rows || dst.value().cols() != cols) {
      throw std::runtime_error("checkpoint parameter " + name + " has the wrong shape");
    }
    auto data = p.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw std::runtime_error("checkpoint parameter " + name + " is truncated");
    }
    dst.value() = Eigen::Map<const Matrix>(data.data(), rows, cols);
    ++loaded;
  }
  if (loaded != store.all().size()) throw std::runtime_error("checkpoint is missing parameters");
  return ck;
}

}  // namespace lesicin
