#include "sva/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "sva/analysis.hpp"
#include "sva/features.hpp"
#include "sva/neural.hpp"
#include "sva/numio.hpp"
#include "sva/pipeline.hpp"
#include "sva/roles.hpp"

namespace sva {

namespace fs = std::filesystem;

namespace {

int log_rank(const std::string& level) {
  if (level == "debug") return 0;
  if (level == "info") return 1;
  if (level == "warning") return 2;
  return 3;
}

void log(const RunConfig& cfg, const std::string& level, const std::string& message) {
  if (log_rank(level) >= log_rank(cfg.log_level)) {
    std::cerr << "[" << level << "] " << message << '\n';
  }
}

// User-supplied resources (scripts, manifest, embeddings, ...) that are
// missing are I/O failures; missing *stage outputs* are pipeline misuse and
// raise ValidationError instead (see require_stage_output).
std::ifstream open_resource(const std::string& path, const char* what) {
  if (path.empty()) {
    throw ValidationError(std::string("config: no ") + what + " path configured");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(std::string("cannot read ") + what + " file '" + path + "'");
  }
  return in;
}

void require_stage_output(const std::string& path, const std::string& message) {
  if (!fs::exists(path)) {
    throw ValidationError(message);
  }
}

std::string out_path(const RunConfig& cfg, const char* name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + cfg.out_dir + "'");
}

std::vector<Screenplay> load_dataset(const RunConfig& cfg, const char* command) {
  const std::string path = out_path(cfg, "dataset.jsonl");
  require_stage_output(path, std::string(command) + ": missing dataset '" + path +
                                 "'; run ingest first");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read dataset '" + path + "'");
  std::vector<Screenplay> dataset = read_dataset(in);
  if (dataset.empty()) {
    throw ValidationError(std::string(command) + ": dataset '" + path + "' has no utterances");
  }
  return dataset;
}

std::map<std::string, ManifestEntry> load_manifest_file(const RunConfig& cfg) {
  std::ifstream in = open_resource(cfg.manifest, "manifest");
  return load_manifest(in);
}

struct FeatureContext {
  std::shared_ptr<const EmbeddingTable> table;
  std::unique_ptr<SentimentProvider> sentiment;
  std::vector<std::string> genre_vocab;
  std::atomic<std::size_t> genre_warnings{0};

  FeatureContext() = default;
  // The atomic counter deletes the implicit move; carry its value over.
  FeatureContext(FeatureContext&& other) noexcept
      : table(std::move(other.table)),
        sentiment(std::move(other.sentiment)),
        genre_vocab(std::move(other.genre_vocab)),
        genre_warnings(other.genre_warnings.load()) {}
};

FeatureContext load_feature_context(const RunConfig& cfg) {
  FeatureContext ctx;
  {
    std::ifstream in = open_resource(cfg.embeddings, "embeddings");
    auto table = std::make_shared<EmbeddingTable>(EmbeddingTable::load(in));
    table->set_ngram_order(cfg.ngram_order);
    ctx.table = std::move(table);
  }

  if (cfg.sentiment.empty() || cfg.sentiment == "zero") {
    ctx.sentiment = std::make_unique<ZeroSentimentProvider>(cfg.sentiment_dim);
  } else if (cfg.sentiment.rfind("bilstm:", 0) == 0) {
    const std::string spec = cfg.sentiment.substr(7);
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos) {
      throw ValidationError("config: sentiment bilstm spec must be bilstm:<seed>:<hidden>");
    }
    const long seed = parse_long(spec.substr(0, colon), "bilstm seed");
    const int hidden = static_cast<int>(parse_long(spec.substr(colon + 1), "bilstm hidden size"));
    if (seed < 0 || hidden < 1) {
      throw ValidationError("config: bilstm seed must be >= 0 and hidden size >= 1");
    }
    auto params = std::make_shared<BiLstmParams>(
        BiLstmParams::init(ctx.table->dimension(), hidden, static_cast<std::uint64_t>(seed)));
    ctx.sentiment = std::make_unique<BilstmSentimentProvider>(std::move(params), ctx.table);
  } else {
    std::ifstream in = open_resource(cfg.sentiment, "sentiment");
    ctx.sentiment = std::make_unique<FileSentimentProvider>(FileSentimentProvider::load(in));
  }

  if (!cfg.genres.empty()) {
    std::ifstream in = open_resource(cfg.genres, "genre vocabulary");
    ctx.genre_vocab = load_genre_vocabulary(in);
  }
  return ctx;
}

MovieFeatures featurize_movie(const Screenplay& movie, const ManifestEntry* entry,
                              FeatureContext& ctx) {
  MovieFeatures features;
  features.movie_id = movie.movie_id;
  if (entry != nullptr) {
    features.label = entry->violence_label;
  }
  const std::set<std::string>& genres = entry != nullptr ? entry->genres : movie.genres;
  features.genre = encode_genres(genres, ctx.genre_vocab, &ctx.genre_warnings).bits;

  const int semantic_dim = ctx.table->dimension();
  const int sentiment_dim = ctx.sentiment->dimension();
  features.features.resize(static_cast<Eigen::Index>(movie.utterances.size()),
                           semantic_dim + sentiment_dim);
  for (std::size_t i = 0; i < movie.utterances.size(); ++i) {
    const Utterance& utt = movie.utterances[i];
    const UtteranceFeature feature =
        make_feature(embed_sentence(utt.tokens, *ctx.table), ctx.sentiment->vector_for(utt));
    features.features.row(static_cast<Eigen::Index>(i)) = feature.combined.transpose();
  }
  return features;
}

int argmax_low_first(const Eigen::Vector3d& probs) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (probs(i) > probs(best)) best = i;
  }
  return best;
}

}  // namespace

int cmd_ingest(const RunConfig& cfg) {
  if (cfg.scripts_dir.empty()) {
    throw ValidationError("config: no scripts_dir path configured");
  }
  if (!fs::is_directory(cfg.scripts_dir)) {
    throw IoError("scripts_dir '" + cfg.scripts_dir + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(cfg.scripts_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ValidationError("ingest: no .txt screenplays in '" + cfg.scripts_dir + "'");
  }

  std::vector<Screenplay> movies;
  std::size_t utterances = 0;
  for (const fs::path& file : files) {
    Screenplay movie = parse_screenplay(read_text_file(file.string()), file.stem().string());
    log(cfg, "debug", "parsed " + movie.movie_id + ": " +
                          std::to_string(movie.utterances.size()) + " utterances");
    utterances += movie.utterances.size();
    movies.push_back(std::move(movie));
  }

  ensure_out_dir(cfg);
  std::ostringstream buffer;
  write_dataset(buffer, movies);
  const std::string path = out_path(cfg, "dataset.jsonl");
  write_text_file(path, buffer.str());
  std::cout << "ingest: " << movies.size() << " movies, " << utterances << " utterances -> "
            << path << '\n';
  return kExitOk;
}

int cmd_train(const RunConfig& cfg) {
  const std::vector<Screenplay> dataset = load_dataset(cfg, "train");
  const std::map<std::string, ManifestEntry> manifest = load_manifest_file(cfg);
  FeatureContext ctx = load_feature_context(cfg);

  std::vector<MovieFeatures> labeled;
  for (const Screenplay& movie : dataset) {
    const auto it = manifest.find(movie.movie_id);
    if (it == manifest.end()) {
      throw ValidationError("train: manifest has no entry for movie '" + movie.movie_id + "'");
    }
    if (!it->second.violence_label.has_value()) {
      log(cfg, "info", "movie '" + movie.movie_id + "' has no label; excluded from training");
      continue;
    }
    labeled.push_back(featurize_movie(movie, &it->second, ctx));
  }
  if (ctx.table->misses() > 0) {
    log(cfg, "warning", std::to_string(ctx.table->misses()) +
                            " utterances had no known embedding constituents");
  }
  if (ctx.genre_warnings.load() > 0) {
    log(cfg, "warning",
        std::to_string(ctx.genre_warnings.load()) + " genres outside the vocabulary ignored");
  }

  const TrainResult result = train(labeled, cfg.train);

  ensure_out_dir(cfg);
  save_model_file(out_path(cfg, "model.txt"), result.model);
  write_text_file(out_path(cfg, "cv_report.txt"), format_cv_report(result.report));

  std::cout << "train: selected H=" << result.report.selected_hidden << " (mean movie macro-F1 "
            << format_double(result.report.mean_movie_f1.at(result.report.selected_hidden))
            << "), final fit " << result.report.final_epochs << " epochs, loss "
            << format_double(result.report.final_loss)
            << (result.report.final_converged ? " (converged)" : " (epoch cap)") << " -> "
            << out_path(cfg, "model.txt") << '\n';
  return kExitOk;
}

int cmd_classify(const RunConfig& cfg) {
  const std::vector<Screenplay> dataset = load_dataset(cfg, "classify");
  const std::map<std::string, ManifestEntry> manifest = load_manifest_file(cfg);
  FeatureContext ctx = load_feature_context(cfg);

  const std::string model_path = out_path(cfg, "model.txt");
  require_stage_output(model_path,
                       "classify: missing model '" + model_path + "'; run train first");
  const ModelParams model = load_model_file(model_path);

  std::vector<PosteriorRecord> records;
  for (const Screenplay& movie : dataset) {
    const auto it = manifest.find(movie.movie_id);
    const ManifestEntry* entry = it == manifest.end() ? nullptr : &it->second;
    const MovieFeatures features = featurize_movie(movie, entry, ctx);
    MoviePosteriors posteriors = movie_posteriors(model, features, cfg.train.k);
    log(cfg, "debug", "movie '" + movie.movie_id + "' -> " +
                          std::string(to_string(posteriors.movie_label)));
    for (PosteriorRecord& record : posteriors.records) {
      records.push_back(std::move(record));
    }
  }

  ensure_out_dir(cfg);
  std::ostringstream buffer;
  write_posteriors(buffer, records);
  const std::string path = out_path(cfg, "posteriors.csv");
  write_text_file(path, buffer.str());
  std::cout << "classify: " << dataset.size() << " movies, " << records.size()
            << " utterances -> " << path << '\n';
  return kExitOk;
}

int cmd_roles(const RunConfig& cfg) {
  const std::vector<Screenplay> dataset = load_dataset(cfg, "roles");

  const std::string posterior_path = out_path(cfg, "posteriors.csv");
  require_stage_output(posterior_path,
                       "roles: missing posterior file '" + posterior_path +
                           "' needed for the LOW gate; run classify first");
  std::vector<PosteriorRecord> posteriors;
  {
    std::ifstream in(posterior_path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + posterior_path + "'");
    posteriors = read_posteriors(in);
  }

  std::vector<ParsedSentence> parses;
  {
    std::ifstream in = open_resource(cfg.parses, "dependency parses");
    parses = load_conllu(in);
  }

  DemographicsIndex demographics;
  if (!cfg.demographics.empty()) {
    std::ifstream in = open_resource(cfg.demographics, "demographics");
    const DemographicsFile file = load_demographics(in);
    if (file.unknown_value_warnings > 0) {
      log(cfg, "warning", std::to_string(file.unknown_value_warnings) +
                              " unrecognized demographic values mapped to UNKNOWN");
    }
    demographics = index_demographics(file.records);
  }

  std::map<std::string, const Screenplay*> by_movie;
  for (const Screenplay& movie : dataset) by_movie[movie.movie_id] = &movie;

  std::map<std::pair<std::string, int>, ViolenceLabel> predicted;
  for (const PosteriorRecord& record : posteriors) {
    predicted[{record.movie_id, record.utterance_index}] = record.predicted_class;
  }

  // first parse per utterance wins; later ones are alternative readings
  std::map<std::pair<std::string, int>, const ParsedSentence*> parse_of;
  for (const ParsedSentence& sentence : parses) {
    parse_of.emplace(std::make_pair(sentence.movie_id, sentence.utt_index), &sentence);
  }

  std::vector<SvoTriplet> gated_triplets;
  std::vector<RoleAssignment> assignments;
  std::size_t gated_low = 0;
  std::size_t unscored = 0;
  for (const Screenplay& movie : dataset) {
    std::set<std::string> roster;
    for (const Utterance& utt : movie.utterances) roster.insert(utt.speaker_id);
    for (const Utterance& utt : movie.utterances) {
      const auto parse_it = parse_of.find({movie.movie_id, utt.index});
      if (parse_it == parse_of.end()) continue;
      const auto label_it = predicted.find({movie.movie_id, utt.index});
      if (label_it == predicted.end()) {
        ++unscored;
        continue;
      }
      if (label_it->second == ViolenceLabel::Low) {
        ++gated_low;
        continue;
      }
      std::vector<SvoTriplet> triplets = extract_svo(*parse_it->second);
      gated_triplets.insert(gated_triplets.end(), triplets.begin(), triplets.end());
      for (const SvoTriplet& triplet : filter_forms(std::move(triplets))) {
        const Resolution resolution =
            resolve_participants(triplet, *parse_it->second, movie.utterances, roster);
        assignments.push_back(
            assign_role(triplet, resolution, utt.speaker_id, label_it->second));
      }
    }
  }
  if (unscored > 0) {
    log(cfg, "warning",
        std::to_string(unscored) + " parsed utterances had no posterior record; skipped");
  }
  log(cfg, "info", std::to_string(gated_low) + " parsed utterances gated out as LOW");

  const std::vector<InteractionPair> interactions =
      collect_interactions(assignments, demographics);

  ensure_out_dir(cfg);
  {
    std::ostringstream buffer;
    write_roles(buffer, assignments);
    write_text_file(out_path(cfg, "roles.csv"), buffer.str());
  }
  {
    std::ostringstream buffer;
    write_interactions(buffer, interactions);
    write_text_file(out_path(cfg, "interactions.csv"), buffer.str());
  }
  {
    std::ostringstream buffer;
    buffer << "form_distribution total=" << gated_triplets.size() << '\n';
    if (!gated_triplets.empty()) {
      for (const auto& [form, share] : form_distribution(gated_triplets)) {
        buffer << to_string(form) << ' ' << format_double(share) << '\n';
      }
    }
    write_text_file(out_path(cfg, "forms.txt"), buffer.str());
  }

  std::cout << "roles: " << gated_triplets.size() << " triplets, " << assignments.size()
            << " assignments, " << interactions.size() << " interactions -> "
            << out_path(cfg, "roles.csv") << '\n';
  return kExitOk;
}

int cmd_stats(const RunConfig& cfg) {
  const std::string roles_path = out_path(cfg, "roles.csv");
  const std::string interactions_path = out_path(cfg, "interactions.csv");
  require_stage_output(roles_path,
                       "stats: missing role file '" + roles_path + "'; run roles first");
  require_stage_output(interactions_path, "stats: missing interaction file '" +
                                              interactions_path + "'; run roles first");

  std::vector<RoleAssignment> roles;
  {
    std::ifstream in(roles_path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + roles_path + "'");
    roles = read_roles(in);
  }
  std::vector<InteractionPair> interactions;
  {
    std::ifstream in(interactions_path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + interactions_path + "'");
    interactions = read_interactions(in);
  }

  DemographicsIndex demographics;
  if (!cfg.demographics.empty()) {
    std::ifstream in = open_resource(cfg.demographics, "demographics");
    demographics = index_demographics(load_demographics(in).records);
  }

  const StatsReport report = run_battery(roles, interactions, demographics, cfg.grouping);

  ensure_out_dir(cfg);
  const std::string path = out_path(cfg, "stats_report.txt");
  write_text_file(path, format_stats_report(report));

  const auto ok_rows = std::count_if(report.rows.begin(), report.rows.end(),
                                     [](const BatteryRow& row) { return row.status == "ok"; });
  std::cout << "stats: " << report.rows.size() << " tests (" << ok_rows << " ok), "
            << report.residual_blocks.size() << " residual tables -> " << path << '\n';
  return kExitOk;
}

int cmd_report(const RunConfig& cfg) {
  std::ostringstream out;
  out << "screenplay violence analysis report\n";
  out << "===================================\n";
  bool any = false;

  const std::string dataset_path = out_path(cfg, "dataset.jsonl");
  if (fs::exists(dataset_path)) {
    std::ifstream in(dataset_path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + dataset_path + "'");
    const std::vector<Screenplay> dataset = read_dataset(in);
    std::size_t utterances = 0;
    std::set<std::string> speakers;
    for (const Screenplay& movie : dataset) {
      utterances += movie.utterances.size();
      for (const Utterance& utt : movie.utterances) {
        speakers.insert(movie.movie_id + "/" + utt.speaker_id);
      }
    }
    out << "\n[dataset]\n";
    out << "movies=" << dataset.size() << '\n';
    out << "utterances=" << utterances << '\n';
    out << "speaking_characters=" << speakers.size() << '\n';
    any = true;
  }

  const std::string cv_path = out_path(cfg, "cv_report.txt");
  if (fs::exists(cv_path)) {
    out << "\n[cross-validation]\n" << read_text_file(cv_path);
    any = true;
  }

  const std::string posterior_path = out_path(cfg, "posteriors.csv");
  if (fs::exists(posterior_path)) {
    std::ifstream in(posterior_path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + posterior_path + "'");
    const std::vector<PosteriorRecord> records = read_posteriors(in);
    std::vector<std::string> order;
    std::map<std::string, std::pair<Eigen::Vector3d, long>> by_movie;
    for (const PosteriorRecord& record : records) {
      auto [it, inserted] =
          by_movie.emplace(record.movie_id, std::make_pair(Eigen::Vector3d::Zero(), 0L));
      if (inserted) order.push_back(record.movie_id);
      it->second.first += record.class_probs;
      it->second.second += 1;
    }
    out << "\n[posteriors]\n";
    for (const std::string& movie_id : order) {
      const auto& [sum, count] = by_movie.at(movie_id);
      const Eigen::Vector3d mean = sum / static_cast<double>(count);
      out << movie_id << " mean_violence_posterior=" << format_double(1.0 - mean(0))
          << " predicted=" << to_string(static_cast<ViolenceLabel>(argmax_low_first(mean)))
          << '\n';
    }
    any = true;
  }

  const std::string forms_path = out_path(cfg, "forms.txt");
  if (fs::exists(forms_path)) {
    out << "\n[forms]\n" << read_text_file(forms_path);
    any = true;
  }

  const std::string stats_path = out_path(cfg, "stats_report.txt");
  if (fs::exists(stats_path)) {
    out << "\n[stats]\n" << read_text_file(stats_path);
    any = true;
  }

  if (!any) {
    throw ValidationError("report: no pipeline outputs in '" + cfg.out_dir +
                          "'; run ingest/train/classify/roles/stats first");
  }

  ensure_out_dir(cfg);
  const std::string path = out_path(cfg, "report.txt");
  write_text_file(path, out.str());
  std::cout << "report -> " << path << '\n';
  return kExitOk;
}

int cmd_check(const RunConfig& cfg) {
  (void)cfg;
  int failures = 0;
  const auto verdict = [&failures](const std::string& name, bool ok, const std::string& detail) {
    if (ok) {
      std::cout << "check " << name << ": ok" << (detail.empty() ? "" : " (" + detail + ")")
                << '\n';
    } else {
      ++failures;
      std::cout << "check " << name << ": FAIL (" << detail << ")\n";
    }
  };

  // analytic gradients vs central differences on seeded configurations
  {
    struct GradConfig {
      int input, hidden, attn, genre, steps, batch;
      std::uint64_t seed;
    };
    const std::vector<GradConfig> configs = {
        {3, 2, 2, 2, 3, 2, 11}, {5, 4, 3, 0, 5, 3, 12}, {4, 3, 4, 3, 1, 4, 13},
        {6, 4, 2, 1, 4, 2, 14}, {2, 2, 2, 2, 2, 1, 15},
    };
    double worst = 0.0;
    for (const GradConfig& gc : configs) {
      Rng rng(mix_seed(gc.seed, 0xC0FFEE));
      ModelParams model =
          ModelParams::init(gc.input, gc.hidden, gc.attn, gc.genre, mix_seed(gc.seed, 1));
      {
        // At the default +-0.08 init the reset-gate and attention-bias
        // gradients sit near the central-difference noise floor (~1e-12),
        // where the relative-error metric is all roundoff. Widening the
        // weights keeps every true gradient measurably above it.
        std::vector<TensorRef> refs = tensors(model);
        for (TensorRef& tensor : refs) tensor.values *= 10.0;
      }
      std::vector<Eigen::MatrixXd> windows;
      std::vector<Eigen::VectorXd> genres;
      std::vector<BatchItem> batch;
      for (int b = 0; b < gc.batch; ++b) {
        Eigen::MatrixXd window(gc.steps, gc.input);
        for (Eigen::Index r = 0; r < window.rows(); ++r) {
          for (Eigen::Index c = 0; c < window.cols(); ++c) {
            window(r, c) = rng.uniform(-1.0, 1.0);
          }
        }
        Eigen::VectorXd genre(gc.genre);
        for (Eigen::Index g = 0; g < genre.size(); ++g) {
          genre(g) = rng.bernoulli(0.5) ? 1.0 : 0.0;
        }
        windows.push_back(std::move(window));
        genres.push_back(std::move(genre));
      }
      for (int b = 0; b < gc.batch; ++b) {
        batch.push_back(
            {windows[static_cast<std::size_t>(b)], genres[static_cast<std::size_t>(b)],
             static_cast<ViolenceLabel>(b % 3)});
      }
      worst = std::max(worst, finite_diff_check(model, batch, 1e-4));
    }
    verdict("gradients", worst < 1e-4, "max relative error " + format_double(worst));
    std::cout << "gradcheck max_rel_err=" << format_double(worst) << '\n';
  }

  // attention over identical hidden states is uniform
  {
    const AttentionParams params{Eigen::MatrixXd::Constant(3, 4, 0.2),
                                 Eigen::VectorXd::Constant(3, 0.1),
                                 Eigen::VectorXd::Constant(3, 0.5)};
    Eigen::MatrixXd hs(5, 4);
    for (Eigen::Index t = 0; t < hs.rows(); ++t) {
      hs.row(t) = Eigen::RowVector4d(0.3, -0.2, 0.9, 0.0);
    }
    const AttentionResult result = attention(hs, params);
    const bool uniform = (result.weights.array() - 0.2).abs().maxCoeff() < 1e-12;
    const bool normalized = std::abs(result.weights.sum() - 1.0) < 1e-12;
    verdict("attention", uniform && normalized, "uniform weights over constant states");
  }

  // windowing: k+1 slots, center at k/2, zero padding outside the movie
  {
    bool ok = true;
    Eigen::MatrixXd features(3, 2);
    features << 1, 2, 3, 4, 5, 6;
    for (int center = 0; center < 3 && ok; ++center) {
      std::vector<bool> padding;
      const Eigen::MatrixXd window = window_matrix(features, center, 4, &padding);
      ok = window.rows() == 5 && window.row(2) == features.row(center) && !padding[2];
      for (int slot = 0; slot < 5 && ok; ++slot) {
        const int source = center - 2 + slot;
        const bool in_range = source >= 0 && source < 3;
        ok = padding[static_cast<std::size_t>(slot)] == !in_range;
        if (!in_range) ok = ok && window.row(slot).isZero();
      }
    }
    verdict("windowing", ok, "k=4 windows over a 3-utterance movie");
  }

  // softmax output is a distribution and favors the larger logit
  {
    const Eigen::VectorXd probs = softmax(Eigen::Vector3d(0.1, 2.0, -1.0));
    const bool ok = std::abs(probs.sum() - 1.0) < 1e-12 && probs(1) > probs(0) &&
                    probs(0) > probs(2) && probs.minCoeff() > 0.0;
    verdict("softmax", ok, "normalization and ordering");
  }

  // seeded rng streams replay exactly
  {
    Rng a(99);
    Rng b(99);
    bool ok = true;
    for (int i = 0; i < 5; ++i) ok = ok && a.uniform() == b.uniform();
    verdict("rng", ok, "identical seeds give identical streams");
  }

  if (failures == 0) {
    std::cout << "check: all passed\n";
    return kExitOk;
  }
  std::cout << "check: " << failures << " failed\n";
  return kExitValidation;
}

int run_command(const std::vector<std::string>& argv) {
  CLI::App app{"screenplay violence analysis pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool seed_set = false;
  std::uint64_t seed = 0;
  bool k_set = false;
  int k = 0;
  bool out_set = false;
  std::string out_dir;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--set", overrides, "extra key=value overrides (repeatable)");
    sub->add_option("--seed", seed, "training seed")->each([&seed_set](const std::string&) {
      seed_set = true;
    });
    sub->add_option("--k", k, "context window width (even)")->each([&k_set](const std::string&) {
      k_set = true;
    });
    sub->add_option("--out", out_dir, "output directory")->each([&out_set](const std::string&) {
      out_set = true;
    });
  };

  struct Subcommand {
    const char* name;
    const char* description;
    int (*run)(const RunConfig&);
  };
  const std::vector<Subcommand> subcommands = {
      {"ingest", "parse screenplays into the canonical dataset", cmd_ingest},
      {"train", "cross-validate, sweep hidden sizes and fit the classifier", cmd_train},
      {"classify", "write per-utterance violence posteriors", cmd_classify},
      {"roles", "extract SVO triplets and assign speaker roles", cmd_roles},
      {"stats", "run the statistical battery over roles and interactions", cmd_stats},
      {"report", "merge pipeline outputs into one report", cmd_report},
      {"check", "self-check gradients and core invariants", cmd_check},
  };
  add_common(&app);
  for (const Subcommand& sub : subcommands) {
    add_common(app.add_subcommand(sub.name, sub.description));
  }

  try {
    std::vector<std::string> args{"sva"};
    args.insert(args.end(), argv.begin(), argv.end());
    std::vector<char*> pointers;
    pointers.reserve(args.size());
    for (std::string& arg : args) pointers.push_back(arg.data());
    app.parse(static_cast<int>(pointers.size()), pointers.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) {
      cfg = load_config_file(config_path);
    }
    for (const std::string& entry : overrides) {
      const std::size_t eq = entry.find('=');
      if (eq == std::string::npos) {
        throw ValidationError("--set: expected key=value, got '" + entry + "'");
      }
      apply_config_entry(cfg, entry.substr(0, eq), entry.substr(eq + 1));
    }
    if (seed_set) cfg.train.seed = seed;
    if (k_set) {
      if (k < 2 || k % 2 != 0) {
        throw ValidationError("odd-k: k must be a positive even number, got " +
                              std::to_string(k));
      }
      cfg.train.k = k;
    }
    if (out_set) cfg.out_dir = out_dir;

    for (const Subcommand& sub : subcommands) {
      if (app.got_subcommand(sub.name)) {
        return sub.run(cfg);
      }
    }
    throw ValidationError("no subcommand given");
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace sva
