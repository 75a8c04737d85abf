#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sva/neural.hpp"
#include "sva/script.hpp"

namespace sva {

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 16;
  double dropout_keep = 0.5;
  double convergence_delta = 1e-8;
  int max_epochs = 200;
  int folds = 5;
  std::vector<int> hidden_grid{4, 8, 16, 32};
  int k = 500;             // even; window covers k/2 utterances each side
  std::uint64_t seed = 0;
  int attention_dim = 0;   // 0 means same as hidden size
};

// A movie after featurization: one row per utterance (semantic ++ sentiment)
// plus the movie's multi-hot genre encoding.
struct MovieFeatures {
  std::string movie_id;
  std::optional<ViolenceLabel> label;
  Eigen::VectorXd genre;
  Eigen::MatrixXd features;  // L x D, row t = utterance t
};

// Symmetric context window: slot k/2 is the center utterance, out-of-range
// slots are zero padding. Length is always k + 1 for even k.
struct ContextWindow {
  std::string movie_id;
  int center_index = 0;
  int k = 0;
  Eigen::MatrixXd slots;         // (k+1) x D
  std::vector<bool> is_padding;  // k+1
};

// The slice features[center-k/2 .. center+k/2] with zero rows where the
// range leaves the movie. Shared by make_windows and the training loop.
Eigen::MatrixXd window_matrix(const Eigen::MatrixXd& features, int center, int k,
                              std::vector<bool>* padding = nullptr);

// One window per utterance. Throws on odd k or an empty movie.
std::vector<ContextWindow> make_windows(const MovieFeatures& movie, int k);

struct PosteriorRecord {
  std::string movie_id;
  int utterance_index = 0;
  Eigen::Vector3d class_probs;       // LOW, MED, HIGH
  double violence_posterior = 0.0;   // 1 - P(LOW)
  ViolenceLabel predicted_class = ViolenceLabel::Low;
};

struct MoviePosteriors {
  std::vector<PosteriorRecord> records;
  ViolenceLabel movie_label = ViolenceLabel::Low;  // argmax of mean class probs
};

// Inference over every centered window, dropout disabled. Argmax ties break
// toward the lower severity class.
MoviePosteriors movie_posteriors(const ModelParams& model, const MovieFeatures& movie, int k);

struct FoldScore {
  int hidden = 0;
  int fold = 0;
  double movie_f1 = 0.0;   // macro-F1 of movie-level predictions
  double window_f1 = 0.0;  // macro-F1 of per-window predictions
};

struct CvReport {
  std::vector<FoldScore> scores;
  std::map<int, double> mean_movie_f1;  // per hidden size
  int selected_hidden = 0;
  int final_epochs = 0;
  double final_loss = 0.0;
  bool final_converged = false;  // loss-delta rule hit before max_epochs
};

struct TrainResult {
  ModelParams model;
  CvReport report;
};

// 5-fold cross-validation over movies (never over windows) with a seeded
// shuffle, hidden-size sweep, then a final fit on all data with the best H
// (ties toward the smaller size). Windows inherit their movie's label.
// Training stops when consecutive epoch losses differ by less than
// convergence_delta or at max_epochs.
TrainResult train(const std::vector<MovieFeatures>& dataset, const TrainConfig& cfg);

std::string format_cv_report(const CvReport& report);
CvReport parse_cv_report(std::istream& in);

// Posterior rows as "movie_id,utterance_index,p_low,p_med,p_high,
// violence_posterior,predicted_class".
void write_posteriors(std::ostream& out, const std::vector<PosteriorRecord>& records);
std::vector<PosteriorRecord> read_posteriors(std::istream& in);

}  // namespace sva
