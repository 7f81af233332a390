#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lesicin/autodiff.hpp"
#include "lesicin/evaluation.hpp"
#include "lesicin/model.hpp"

namespace lesicin {

enum class WeightScheme { TWS, VWS };
std::string to_string(WeightScheme w);
WeightScheme weight_scheme_from_string(const std::string& s);

struct TrainConfig {
  std::array<double, 3> theta{1.0, 2.0, 3.0};  // attribute, structural, alignment
  double lambda_a = 0.25;
  double lambda_l = 0.75;
  double tau = 0.65;
  double eta = 10.0;
  double lr = 1e-3;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
  WeightScheme scheme = WeightScheme::TWS;
  // Pick tau on the validation set after training.
  bool tune_tau = true;
  double eps = 1e-7;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

// ---- class weights and losses ------------------------------------------

// Citations per section (in hierarchy order) among the given facts.
std::vector<std::size_t> section_frequencies(std::span<const FactDocument> docs,
                                             const StatuteHierarchy& hierarchy);
// w_s = min(f_max / f_s, eta); unseen sections get eta.
ad::Vector class_weights_tws(std::span<const std::size_t> freqs, double eta);
// w_s = N / f_s; unseen sections get N.
ad::Vector class_weights_vws(std::span<const std::size_t> freqs, std::size_t n_docs);

// |S| x B multi-hot targets.
ad::Matrix label_targets(std::span<const FactDocument* const> facts,
                         const StatuteHierarchy& hierarchy);

// theta_a L_a + theta_s L_s + theta_l L_l; a missing L_s contributes nothing.
ad::Var combined_loss(ad::Var la, std::optional<ad::Var> ls, ad::Var ll,
                      const std::array<double, 3>& theta);

// Plain Adam (beta1 0.9, beta2 0.999, eps 1e-8) without decay or clipping.
class Adam {
 public:
  Adam(std::vector<ad::Parameter*> params, double lr);
  void step();
  long steps() const { return t_; }

 private:
  std::vector<ad::Parameter*> params_;
  std::vector<ad::Matrix> m_, v_;
  double lr_;
  long t_ = 0;
};

// ---- training ------------------------------------------------------------

struct EpochLog {
  int epoch = 0;
  double loss = 0.0, loss_a = 0.0, loss_s = 0.0, loss_l = 0.0;
  double val_macro_f1 = 0.0;
  std::string to_json() const;
};

struct TrainResult {
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_macro_f1 = 0.0;
  double tau = 0.65;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Loss of one batch with the given sampling seed; exposed for gradient
// checks. Dropout applies when `dropout_rng` is set.
struct BatchLoss {
  ad::Var total;
  double loss_a = 0.0, loss_s = 0.0, loss_l = 0.0;
};
BatchLoss batch_loss(ad::Tape& t, const Model& model, std::span<const FactDocument* const> batch,
                     const ad::Vector& weights, const TrainConfig& cfg, std::uint64_t sample_seed,
                     std::mt19937_64* dropout_rng);

// Trains in place. After the last epoch the parameters of the best
// validation epoch are restored. Throws TrainingDiverged on a non-finite
// loss.
TrainResult train(Model& model, std::span<const FactDocument> train_docs,
                  std::span<const FactDocument> val_docs, const TrainConfig& cfg,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// ---- inference -----------------------------------------------------------

struct Prediction {
  LabelSet labels;          // section indices
  ad::Vector combined;      // lambda_a o_a + lambda_l o_l
};

class Predictor {
 public:
  explicit Predictor(const Model& model);
  ad::Vector combined_scores(const FactDocument& fact, double lambda_a, double lambda_l) const;
  Prediction predict(const FactDocument& fact, double lambda_a, double lambda_l, double tau) const;

 private:
  const Model* model_;
  SectionState state_;
};

LabelSet threshold(const ad::Vector& combined, double tau);
LabelSet gold_labels(const FactDocument& doc, const StatuteHierarchy& hierarchy);

// Combined scores for every document, one column each.
ad::Matrix score_documents(const Model& model, std::span<const FactDocument> docs,
                           double lambda_a, double lambda_l);

// Tau on the grid maximizing macro-F1 over the documents; ties go to the
// smaller tau. Default grid 0.05, 0.10, ..., 0.95.
std::vector<double> default_tau_grid();
double tune_threshold(const ad::Matrix& combined, std::span<const LabelSet> golds,
                      std::span<const std::string> universe,
                      std::span<const double> grid);

struct Evaluation {
  std::vector<LabelSet> predictions;
  std::vector<LabelSet> golds;
  ad::Matrix combined;
  EvalReport report;
};
Evaluation evaluate_model(const Model& model, std::span<const FactDocument> docs, double lambda_a,
                          double lambda_l, double tau);

// ---- checkpoints -----------------------------------------------------------

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  std::unique_ptr<Model> model;
  TrainConfig train;
  int best_epoch = 0;
  double best_val_macro_f1 = 0.0;
  double tau = 0.65;
};

void save_checkpoint(const std::filesystem::path& path, const Model& model,
                     const TrainConfig& train, const TrainResult& result);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lesicin
