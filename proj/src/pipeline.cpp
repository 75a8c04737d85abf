#include "sva/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>
#include <sstream>

#include "sva/numio.hpp"
#include "sva/stats.hpp"

namespace sva {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

int argmax_low_first(const Eigen::Vector3d& probs) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (probs(i) > probs(best)) best = i;
  }
  return best;
}

// Seed salts: keep the fold/H streams, the shuffle stream and the final-fit
// stream disjoint.
constexpr std::uint64_t kFoldOrderSalt = 0x464f4c44;  // "FOLD"
constexpr std::uint64_t kFinalFitSalt = 0x46494e4c;   // "FINL"
constexpr std::uint64_t kEpochStreamSalt = 0x45504f43;  // "EPOC"

std::uint64_t sweep_salt(int hidden, int fold) {
  return (static_cast<std::uint64_t>(hidden) << 20) | static_cast<std::uint64_t>(fold);
}

struct Example {
  int movie = 0;
  int center = 0;
};

struct FitResult {
  ModelParams model;
  int epochs = 0;
  double loss = 0.0;
  bool converged = false;
};

FitResult fit(const std::vector<MovieFeatures>& movies, const std::vector<int>& movie_ids,
              int hidden, const TrainConfig& cfg, std::uint64_t seed) {
  const int input_dim = static_cast<int>(movies[movie_ids[0]].features.cols());
  const int genre_dim = static_cast<int>(movies[movie_ids[0]].genre.size());
  const int attn_dim = cfg.attention_dim > 0 ? cfg.attention_dim : hidden;

  std::vector<Example> examples;
  for (const int id : movie_ids) {
    const MovieFeatures& movie = movies[id];
    require(movie.label.has_value(), "training: movie '" + movie.movie_id + "' has no label");
    require(movie.features.rows() >= 1, "training: movie '" + movie.movie_id + "' is empty");
    require(movie.features.cols() == input_dim,
            "training: inconsistent feature dimension for movie '" + movie.movie_id + "'");
    require(movie.genre.size() == genre_dim,
            "training: inconsistent genre dimension for movie '" + movie.movie_id + "'");
    for (int center = 0; center < movie.features.rows(); ++center) {
      examples.push_back({id, center});
    }
  }
  require(!examples.empty(), "training: no training windows");

  FitResult result;
  result.model = ModelParams::init(input_dim, hidden, attn_dim, genre_dim, seed);
  AdamState adam = AdamState::init(result.model, {cfg.learning_rate, 0.9, 0.999, 1e-8});
  Rng epoch_rng(mix_seed(seed, kEpochStreamSalt));

  double previous_loss = 0.0;
  bool have_previous = false;
  const std::size_t batch_size = static_cast<std::size_t>(std::max(1, cfg.batch_size));

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    epoch_rng.shuffle(examples);
    double loss_sum = 0.0;
    long batches = 0;
    for (std::size_t start = 0; start < examples.size(); start += batch_size) {
      const std::size_t stop = std::min(examples.size(), start + batch_size);
      std::vector<Eigen::MatrixXd> windows;
      windows.reserve(stop - start);
      std::vector<BatchItem> batch;
      batch.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const MovieFeatures& movie = movies[examples[i].movie];
        windows.push_back(window_matrix(movie.features, examples[i].center, cfg.k));
        batch.push_back({windows.back(), movie.genre, *movie.label});
      }
      const LossResult step =
          loss_and_gradients(batch, result.model, &epoch_rng, cfg.dropout_keep);
      adam_step(result.model, step.grads, adam);
      loss_sum += step.loss;
      ++batches;
    }
    const double epoch_loss = loss_sum / static_cast<double>(batches);
    require(std::isfinite(epoch_loss), "diverged-training: non-finite epoch loss at epoch " +
                                           std::to_string(epoch));
    result.epochs = epoch;
    result.loss = epoch_loss;
    if (have_previous && std::abs(epoch_loss - previous_loss) < cfg.convergence_delta) {
      result.converged = true;
      break;
    }
    previous_loss = epoch_loss;
    have_previous = true;
  }
  return result;
}

}  // namespace

Eigen::MatrixXd window_matrix(const Eigen::MatrixXd& features, int center, int k,
                              std::vector<bool>* padding) {
  require(k > 0 && k % 2 == 0, "window: k must be a positive even number, got " +
                                   std::to_string(k));
  require(center >= 0 && center < features.rows(), "window: center index out of range");
  const int half = k / 2;
  const int length = k + 1;
  Eigen::MatrixXd slots = Eigen::MatrixXd::Zero(length, features.cols());
  if (padding != nullptr) padding->assign(static_cast<std::size_t>(length), true);
  for (int slot = 0; slot < length; ++slot) {
    const int source = center - half + slot;
    if (source >= 0 && source < features.rows()) {
      slots.row(slot) = features.row(source);
      if (padding != nullptr) (*padding)[static_cast<std::size_t>(slot)] = false;
    }
  }
  return slots;
}

std::vector<ContextWindow> make_windows(const MovieFeatures& movie, int k) {
  require(movie.features.rows() >= 1, "window: movie '" + movie.movie_id + "' has no utterances");
  std::vector<ContextWindow> windows;
  windows.reserve(static_cast<std::size_t>(movie.features.rows()));
  for (int center = 0; center < movie.features.rows(); ++center) {
    ContextWindow window;
    window.movie_id = movie.movie_id;
    window.center_index = center;
    window.k = k;
    window.slots = window_matrix(movie.features, center, k, &window.is_padding);
    windows.push_back(std::move(window));
  }
  return windows;
}

MoviePosteriors movie_posteriors(const ModelParams& model, const MovieFeatures& movie, int k) {
  require(movie.features.rows() >= 1,
          "classify: movie '" + movie.movie_id + "' has no utterances");
  MoviePosteriors result;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int center = 0; center < movie.features.rows(); ++center) {
    const Eigen::MatrixXd window = window_matrix(movie.features, center, k);
    const VectorXd probs = classify_window(window, movie.genre, model);
    PosteriorRecord record;
    record.movie_id = movie.movie_id;
    record.utterance_index = center;
    record.class_probs = probs;
    record.violence_posterior = 1.0 - probs(0);
    record.predicted_class = static_cast<ViolenceLabel>(argmax_low_first(record.class_probs));
    mean += record.class_probs;
    result.records.push_back(std::move(record));
  }
  mean /= static_cast<double>(result.records.size());
  result.movie_label = static_cast<ViolenceLabel>(argmax_low_first(mean));
  return result;
}

TrainResult train(const std::vector<MovieFeatures>& dataset, const TrainConfig& cfg) {
  require(cfg.folds >= 2, "training: needs at least 2 folds");
  require(!cfg.hidden_grid.empty(), "training: empty hidden size grid");
  for (const int h : cfg.hidden_grid) {
    require(h >= 1, "training: hidden sizes must be >= 1");
  }
  require(cfg.k > 0 && cfg.k % 2 == 0, "training: k must be a positive even number");
  require(cfg.dropout_keep > 0.0 && cfg.dropout_keep <= 1.0,
          "training: dropout keep rate must be in (0, 1]");
  require(cfg.max_epochs >= 1, "training: max_epochs must be >= 1");
  for (const MovieFeatures& movie : dataset) {
    require(movie.label.has_value(),
            "training: movie '" + movie.movie_id + "' has no violence label");
  }
  require(static_cast<int>(dataset.size()) >= cfg.folds,
          "too-few-movies: " + std::to_string(dataset.size()) + " labeled movies but " +
              std::to_string(cfg.folds) + " folds");

  // Seeded assignment of movies to folds, independent of the hidden sweep.
  std::vector<int> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Rng fold_rng(mix_seed(cfg.seed, kFoldOrderSalt));
  fold_rng.shuffle(order);
  std::vector<int> fold_of(dataset.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    fold_of[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos) % cfg.folds;
  }

  TrainResult result;
  for (const int hidden : cfg.hidden_grid) {
    for (int fold = 0; fold < cfg.folds; ++fold) {
      std::vector<int> train_ids;
      std::vector<int> val_ids;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        (fold_of[i] == fold ? val_ids : train_ids).push_back(static_cast<int>(i));
      }
      require(!train_ids.empty() && !val_ids.empty(),
              "training: fold " + std::to_string(fold) + " is empty");
      const FitResult fitted =
          fit(dataset, train_ids, hidden, cfg, mix_seed(cfg.seed, sweep_salt(hidden, fold)));

      std::vector<int> movie_pred;
      std::vector<int> movie_gold;
      std::vector<int> window_pred;
      std::vector<int> window_gold;
      for (const int id : val_ids) {
        const MoviePosteriors posterior = movie_posteriors(fitted.model, dataset[id], cfg.k);
        movie_pred.push_back(static_cast<int>(posterior.movie_label));
        movie_gold.push_back(static_cast<int>(*dataset[id].label));
        for (const PosteriorRecord& record : posterior.records) {
          window_pred.push_back(static_cast<int>(record.predicted_class));
          window_gold.push_back(static_cast<int>(*dataset[id].label));
        }
      }
      FoldScore score;
      score.hidden = hidden;
      score.fold = fold;
      score.movie_f1 = macro_f1(movie_pred, movie_gold, 3);
      score.window_f1 = macro_f1(window_pred, window_gold, 3);
      result.report.scores.push_back(score);
    }
  }

  for (const int hidden : cfg.hidden_grid) {
    double sum = 0.0;
    int count = 0;
    for (const FoldScore& score : result.report.scores) {
      if (score.hidden == hidden) {
        sum += score.movie_f1;
        ++count;
      }
    }
    result.report.mean_movie_f1[hidden] = sum / count;
  }

  int best_hidden = 0;
  double best_mean = -1.0;
  for (const auto& [hidden, mean] : result.report.mean_movie_f1) {
    if (mean > best_mean || (mean == best_mean && hidden < best_hidden)) {
      best_hidden = hidden;
      best_mean = mean;
    }
  }
  result.report.selected_hidden = best_hidden;

  std::vector<int> all_ids(dataset.size());
  for (std::size_t i = 0; i < all_ids.size(); ++i) all_ids[i] = static_cast<int>(i);
  const FitResult final_fit = fit(dataset, all_ids, best_hidden, cfg,
                                  mix_seed(cfg.seed, kFinalFitSalt + best_hidden));
  result.model = final_fit.model;
  result.report.final_epochs = final_fit.epochs;
  result.report.final_loss = final_fit.loss;
  result.report.final_converged = final_fit.converged;
  return result;
}

std::string format_cv_report(const CvReport& report) {
  std::ostringstream out;
  out << "cv_report format=1\n";
  for (const FoldScore& score : report.scores) {
    out << "score H=" << score.hidden << " fold=" << score.fold
        << " movie_f1=" << format_double(score.movie_f1)
        << " window_f1=" << format_double(score.window_f1) << '\n';
  }
  for (const auto& [hidden, mean] : report.mean_movie_f1) {
    out << "mean H=" << hidden << " movie_f1=" << format_double(mean) << '\n';
  }
  out << "selected_H=" << report.selected_hidden << '\n';
  out << "final epochs=" << report.final_epochs << " loss=" << format_double(report.final_loss)
      << " converged=" << (report.final_converged ? 1 : 0) << '\n';
  return out.str();
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& line, std::size_t from) {
  std::map<std::string, std::string> entries;
  std::istringstream stream(line.substr(from));
  std::string token;
  while (stream >> token) {
    const std::size_t eq = token.find('=');
    if (eq != std::string::npos) {
      entries[token.substr(0, eq)] = token.substr(eq + 1);
    }
  }
  return entries;
}

}  // namespace

CvReport parse_cv_report(std::istream& in) {
  CvReport report;
  std::string line;
  if (!std::getline(in, line) || line.rfind("cv_report format=1", 0) != 0) {
    throw ValidationError("cv report: missing 'cv_report format=1' header");
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("score ", 0) == 0) {
      const auto kv = parse_kv(line, 6);
      FoldScore score;
      score.hidden = static_cast<int>(parse_long(kv.at("H"), "hidden size"));
      score.fold = static_cast<int>(parse_long(kv.at("fold"), "fold"));
      score.movie_f1 = parse_double(kv.at("movie_f1"), "movie f1");
      score.window_f1 = parse_double(kv.at("window_f1"), "window f1");
      report.scores.push_back(score);
    } else if (line.rfind("mean ", 0) == 0) {
      const auto kv = parse_kv(line, 5);
      report.mean_movie_f1[static_cast<int>(parse_long(kv.at("H"), "hidden size"))] =
          parse_double(kv.at("movie_f1"), "movie f1");
    } else if (line.rfind("selected_H=", 0) == 0) {
      report.selected_hidden = static_cast<int>(parse_long(line.substr(11), "selected H"));
    } else if (line.rfind("final ", 0) == 0) {
      const auto kv = parse_kv(line, 6);
      report.final_epochs = static_cast<int>(parse_long(kv.at("epochs"), "epochs"));
      report.final_loss = parse_double(kv.at("loss"), "loss");
      report.final_converged = parse_long(kv.at("converged"), "converged") != 0;
    } else {
      throw ValidationError("cv report: unrecognized line '" + line + "'");
    }
  }
  return report;
}

void write_posteriors(std::ostream& out, const std::vector<PosteriorRecord>& records) {
  out << "movie_id,utterance_index,p_low,p_med,p_high,violence_posterior,predicted_class\n";
  for (const PosteriorRecord& record : records) {
    out << record.movie_id << ',' << record.utterance_index << ','
        << format_double(record.class_probs(0)) << ',' << format_double(record.class_probs(1))
        << ',' << format_double(record.class_probs(2)) << ','
        << format_double(record.violence_posterior) << ',' << to_string(record.predicted_class)
        << '\n';
  }
}

std::vector<PosteriorRecord> read_posteriors(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("posteriors: empty file");
  }
  std::vector<PosteriorRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    for (const char c : line) {
      if (c == ',') {
        fields.push_back(field);
        field.clear();
      } else {
        field += c;
      }
    }
    fields.push_back(field);
    if (fields.size() != 7) {
      throw ValidationError("posteriors: expected 7 fields at line " + std::to_string(line_no));
    }
    PosteriorRecord record;
    record.movie_id = fields[0];
    record.utterance_index = static_cast<int>(parse_long(fields[1], "utterance index"));
    record.class_probs(0) = parse_double(fields[2], "p_low");
    record.class_probs(1) = parse_double(fields[3], "p_med");
    record.class_probs(2) = parse_double(fields[4], "p_high");
    record.violence_posterior = parse_double(fields[5], "violence posterior");
    record.predicted_class = label_from_string(fields[6]);
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace sva
