#include "sva/features.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <sstream>

#include "sva/neural.hpp"
#include "sva/numio.hpp"

namespace sva {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> parts;
  std::istringstream stream(line);
  std::string part;
  while (stream >> part) parts.push_back(std::move(part));
  return parts;
}

}  // namespace

EmbeddingTable::EmbeddingTable(EmbeddingTable&& other) noexcept
    : dimension_(other.dimension_),
      ngram_order_(other.ngram_order_),
      entries_(std::move(other.entries_)),
      misses_(other.misses_.load()) {}

EmbeddingTable& EmbeddingTable::operator=(EmbeddingTable&& other) noexcept {
  dimension_ = other.dimension_;
  ngram_order_ = other.ngram_order_;
  entries_ = std::move(other.entries_);
  misses_.store(other.misses_.load());
  return *this;
}

EmbeddingTable EmbeddingTable::load(std::istream& stream) {
  std::string line;
  if (!std::getline(stream, line)) {
    throw ValidationError("embeddings: empty file");
  }
  const std::vector<std::string> header = split_ws(line);
  if (header.size() != 2) {
    throw ValidationError("embeddings: expected 'count dimension' header");
  }
  const long count = parse_long(header[0], "embedding count");
  const long dim = parse_long(header[1], "embedding dimension");
  if (count < 0 || dim <= 0) {
    throw ValidationError("embeddings: count must be >= 0 and dimension > 0");
  }

  EmbeddingTable table;
  table.dimension_ = static_cast<int>(dim);
  table.entries_.reserve(static_cast<std::size_t>(count));
  int line_no = 1;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> parts = split_ws(line);
    if (parts.empty()) continue;
    if (parts.size() != static_cast<std::size_t>(dim) + 1) {
      throw ValidationError("embeddings: dimension-mismatch at line " + std::to_string(line_no) +
                            ": expected " + std::to_string(dim) + " values for key '" +
                            parts[0] + "'");
    }
    Eigen::VectorXd vec(dim);
    for (long i = 0; i < dim; ++i) {
      vec(i) = parse_double(parts[static_cast<std::size_t>(i) + 1], "embedding value");
    }
    if (!table.entries_.emplace(parts[0], std::move(vec)).second) {
      throw ValidationError("embeddings: duplicate-key '" + parts[0] + "' at line " +
                            std::to_string(line_no));
    }
  }
  if (table.entries_.size() != static_cast<std::size_t>(count)) {
    throw ValidationError("embeddings: header promised " + std::to_string(count) +
                          " entries, file has " + std::to_string(table.entries_.size()));
  }
  return table;
}

void EmbeddingTable::set_ngram_order(int order) {
  if (order < 1) {
    throw ValidationError("embeddings: ngram order must be >= 1, got " + std::to_string(order));
  }
  ngram_order_ = order;
}

const Eigen::VectorXd* EmbeddingTable::find(std::string_view key) const {
  const auto it = entries_.find(std::string(key));
  return it == entries_.end() ? nullptr : &it->second;
}

Eigen::VectorXd embed_sentence(std::span<const std::string> tokens, const EmbeddingTable& table) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension());
  int found = 0;
  std::vector<std::string> lowered;
  lowered.reserve(tokens.size());
  for (const std::string& token : tokens) lowered.push_back(lower_ascii(token));

  for (int order = 1; order <= table.ngram_order(); ++order) {
    if (lowered.size() < static_cast<std::size_t>(order)) break;
    for (std::size_t i = 0; i + order <= lowered.size(); ++i) {
      std::string key = lowered[i];
      for (int j = 1; j < order; ++j) {
        key += '_';
        key += lowered[i + j];
      }
      if (const Eigen::VectorXd* vec = table.find(key)) {
        sum += *vec;
        ++found;
      }
    }
  }
  if (found == 0) {
    table.count_miss();
    return Eigen::VectorXd::Zero(table.dimension());
  }
  return sum / found;
}

UtteranceFeature make_feature(Eigen::VectorXd semantic, Eigen::VectorXd sentiment) {
  UtteranceFeature feature;
  feature.combined.resize(semantic.size() + sentiment.size());
  feature.combined << semantic, sentiment;
  if (!feature.combined.allFinite()) {
    throw ValidationError("features: non-finite feature value");
  }
  feature.semantic = std::move(semantic);
  feature.sentiment = std::move(sentiment);
  return feature;
}

FileSentimentProvider::FileSentimentProvider(FileSentimentProvider&& other) noexcept
    : dimension_(other.dimension_),
      vectors_(std::move(other.vectors_)),
      misses_(other.misses_.load()) {}

FileSentimentProvider& FileSentimentProvider::operator=(FileSentimentProvider&& other) noexcept {
  dimension_ = other.dimension_;
  vectors_ = std::move(other.vectors_);
  misses_.store(other.misses_.load());
  return *this;
}

FileSentimentProvider FileSentimentProvider::load(std::istream& stream) {
  FileSentimentProvider provider;
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    std::vector<std::string> parts = split_ws(line);
    if (parts.empty()) continue;
    if (parts.size() < 3) {
      throw ValidationError("sentiment: expected 'movie_id index v1 ...' at line " +
                            std::to_string(line_no));
    }
    const std::string movie_id = parts[0];
    const int index = static_cast<int>(parse_long(parts[1], "sentiment utterance index"));
    const int dim = static_cast<int>(parts.size()) - 2;
    if (provider.dimension_ == 0) {
      provider.dimension_ = dim;
    } else if (dim != provider.dimension_) {
      throw ValidationError("sentiment: inconsistent dimension at line " + std::to_string(line_no) +
                            ": expected " + std::to_string(provider.dimension_) + ", found " +
                            std::to_string(dim));
    }
    Eigen::VectorXd vec(dim);
    for (int i = 0; i < dim; ++i) {
      vec(i) = parse_double(parts[static_cast<std::size_t>(i) + 2], "sentiment value");
    }
    if (!provider.vectors_.emplace(std::make_pair(movie_id, index), std::move(vec)).second) {
      throw ValidationError("sentiment: duplicate key " + movie_id + " " + std::to_string(index) +
                            " at line " + std::to_string(line_no));
    }
  }
  if (provider.dimension_ == 0) {
    throw ValidationError("sentiment: empty file");
  }
  return provider;
}

Eigen::VectorXd FileSentimentProvider::vector_for(const Utterance& utterance) const {
  const auto it = vectors_.find(std::make_pair(utterance.movie_id, utterance.index));
  if (it == vectors_.end()) {
    misses_.fetch_add(1, std::memory_order_relaxed);
    return Eigen::VectorXd::Zero(dimension_);
  }
  return it->second;
}

BilstmSentimentProvider::BilstmSentimentProvider(std::shared_ptr<const BiLstmParams> params,
                                                 std::shared_ptr<const EmbeddingTable> table)
    : params_(std::move(params)), table_(std::move(table)) {
  if (params_ == nullptr || table_ == nullptr) {
    throw ValidationError("sentiment: bilstm provider needs parameters and an embedding table");
  }
  if (params_->forward.input_dim() != table_->dimension()) {
    throw ValidationError("sentiment: bilstm input dimension " +
                          std::to_string(params_->forward.input_dim()) +
                          " does not match embedding dimension " +
                          std::to_string(table_->dimension()));
  }
}

BilstmSentimentProvider::~BilstmSentimentProvider() = default;

int BilstmSentimentProvider::dimension() const {
  return 2 * params_->forward.hidden_dim();
}

Eigen::VectorXd BilstmSentimentProvider::vector_for(const Utterance& utterance) const {
  if (utterance.tokens.empty()) {
    return Eigen::VectorXd::Zero(dimension());
  }
  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(utterance.tokens.size()), table_->dimension());
  for (std::size_t t = 0; t < utterance.tokens.size(); ++t) {
    const Eigen::VectorXd* vec = table_->find(lower_ascii(utterance.tokens[t]));
    if (vec != nullptr) {
      inputs.row(static_cast<Eigen::Index>(t)) = vec->transpose();
    } else {
      inputs.row(static_cast<Eigen::Index>(t)).setZero();
    }
  }
  return bilstm_forward(inputs, *params_);
}

GenreVector encode_genres(const std::set<std::string>& genres,
                          const std::vector<std::string>& vocabulary,
                          std::atomic<std::size_t>* warnings) {
  GenreVector out;
  out.bits = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocabulary.size()));
  for (const std::string& genre : genres) {
    const auto it = std::lower_bound(vocabulary.begin(), vocabulary.end(), genre);
    if (it != vocabulary.end() && *it == genre) {
      out.bits(static_cast<Eigen::Index>(it - vocabulary.begin())) = 1.0;
    } else if (warnings != nullptr) {
      warnings->fetch_add(1, std::memory_order_relaxed);
    }
  }
  return out;
}

std::vector<std::string> load_genre_vocabulary(std::istream& stream) {
  std::vector<std::string> vocabulary;
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t b = 0;
    std::size_t e = line.size();
    while (b < e && std::isspace(static_cast<unsigned char>(line[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(line[e - 1]))) --e;
    if (b < e) vocabulary.emplace_back(line.substr(b, e - b));
  }
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  return vocabulary;
}

}  // namespace sva
