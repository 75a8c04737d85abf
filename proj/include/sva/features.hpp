#pragma once

#include <Eigen/Core>
#include <atomic>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sva/script.hpp"

namespace sva {

// Token and n-gram embedding table (word2vec text convention: a
// "count dimension" header, then one "key v1 ... v_d" row per entry).
// Immutable after load; the out-of-vocabulary miss counter is the only
// mutable state and is atomic.
class EmbeddingTable {
 public:
  static EmbeddingTable load(std::istream& stream);

  EmbeddingTable() = default;
  // The atomic counter deletes the implicit moves; these carry its value over.
  EmbeddingTable(EmbeddingTable&& other) noexcept;
  EmbeddingTable& operator=(EmbeddingTable&& other) noexcept;

  int dimension() const { return dimension_; }
  int ngram_order() const { return ngram_order_; }
  void set_ngram_order(int order);
  std::size_t size() const { return entries_.size(); }

  const Eigen::VectorXd* find(std::string_view key) const;

  std::size_t misses() const { return misses_.load(); }
  void count_miss() const { misses_.fetch_add(1, std::memory_order_relaxed); }

 private:
  int dimension_ = 0;
  int ngram_order_ = 2;
  std::unordered_map<std::string, Eigen::VectorXd> entries_;
  mutable std::atomic<std::size_t> misses_{0};
};

// Mean of the vectors of all unigrams and contiguous n-grams (orders 2 to
// table.ngram_order()) present in the table; n-gram keys join tokens with
// single underscores. Tokens are lowercased before lookup. A sentence with
// no known constituent maps to the zero vector and counts one miss.
Eigen::VectorXd embed_sentence(std::span<const std::string> tokens, const EmbeddingTable& table);

struct UtteranceFeature {
  Eigen::VectorXd semantic;
  Eigen::VectorXd sentiment;
  Eigen::VectorXd combined;  // semantic followed by sentiment
};

UtteranceFeature make_feature(Eigen::VectorXd semantic, Eigen::VectorXd sentiment);

// Pluggable source of per-utterance sentiment vectors.
class SentimentProvider {
 public:
  virtual ~SentimentProvider() = default;
  virtual int dimension() const = 0;
  virtual Eigen::VectorXd vector_for(const Utterance& utterance) const = 0;
};

// Precomputed vectors keyed by (movie_id, index); file rows are
// "movie_id index v1 ... v_dm". Missing keys yield the zero vector and
// count a miss.
class FileSentimentProvider : public SentimentProvider {
 public:
  static FileSentimentProvider load(std::istream& stream);

  FileSentimentProvider() = default;
  FileSentimentProvider(FileSentimentProvider&& other) noexcept;
  FileSentimentProvider& operator=(FileSentimentProvider&& other) noexcept;

  int dimension() const override { return dimension_; }
  Eigen::VectorXd vector_for(const Utterance& utterance) const override;
  std::size_t misses() const { return misses_.load(); }

 private:
  int dimension_ = 0;
  std::map<std::pair<std::string, int>, Eigen::VectorXd> vectors_;
  mutable std::atomic<std::size_t> misses_{0};
};

struct BiLstmParams;  // neural.hpp

// Encodes an utterance by running a bidirectional LSTM over its token
// embeddings and concatenating the final hidden states of both directions.
class BilstmSentimentProvider : public SentimentProvider {
 public:
  BilstmSentimentProvider(std::shared_ptr<const BiLstmParams> params,
                          std::shared_ptr<const EmbeddingTable> table);
  ~BilstmSentimentProvider() override;

  int dimension() const override;
  Eigen::VectorXd vector_for(const Utterance& utterance) const override;

 private:
  std::shared_ptr<const BiLstmParams> params_;
  std::shared_ptr<const EmbeddingTable> table_;
};

// All-zero sentiment of a fixed width, for runs without a sentiment resource.
class ZeroSentimentProvider : public SentimentProvider {
 public:
  explicit ZeroSentimentProvider(int dimension) : dimension_(dimension) {}
  int dimension() const override { return dimension_; }
  Eigen::VectorXd vector_for(const Utterance&) const override {
    return Eigen::VectorXd::Zero(dimension_);
  }

 private:
  int dimension_;
};

struct GenreVector {
  Eigen::VectorXd bits;  // multi-hot over the configured vocabulary
};

// vocabulary must be sorted and unique; genres outside it are ignored and
// counted on `warnings` when provided.
GenreVector encode_genres(const std::set<std::string>& genres,
                          const std::vector<std::string>& vocabulary,
                          std::atomic<std::size_t>* warnings = nullptr);

// One genre per line; sorted and deduplicated on load.
std::vector<std::string> load_genre_vocabulary(std::istream& stream);

}  // namespace sva
