#include <cmath>
#include <memory>
#include <sstream>

#include "doctest.h"
#include "oracle.hpp"
#include "sva/features.hpp"
#include "sva/neural.hpp"

namespace {

using namespace sva;

EmbeddingTable table_from(const std::string& text) {
  std::istringstream in(text);
  return EmbeddingTable::load(in);
}

}  // namespace

TEST_CASE("EmbeddingTable::load reads the word2vec text convention") {
  const EmbeddingTable table = table_from(
      "3 2\n"
      "the 1 0\n"
      "dog 0 1\n"
      "the_dog 1 1\n");
  CHECK(table.size() == 3);
  CHECK(table.dimension() == 2);
  REQUIRE(table.find("dog") != nullptr);
  CHECK((*table.find("dog"))(1) == 1.0);
  CHECK(table.find("cat") == nullptr);
}

TEST_CASE("EmbeddingTable::load validates header, arity, duplicates and count") {
  CHECK_THROWS_AS(table_from(""), ValidationError);
  CHECK_THROWS_AS(table_from("1\n"), ValidationError);
  CHECK_THROWS_WITH_AS(table_from("1 2\nthe 1 0 3\n"), doctest::Contains("dimension-mismatch"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(table_from("2 2\nthe 1 0\nthe 0 1\n"), doctest::Contains("duplicate-key"),
                       ValidationError);
  CHECK_THROWS_AS(table_from("5 2\nthe 1 0\n"), ValidationError);
}

TEST_CASE("embed_sentence averages unigrams and found n-grams") {
  const EmbeddingTable table = table_from(
      "3 2\n"
      "the 1 0\n"
      "dog 0 1\n"
      "the_dog 1 1\n");
  const std::vector<std::string> tokens = {"The", "DOG"};

  // unigrams (1,0), (0,1) and bigram (1,1): mean (2/3, 2/3)
  const Eigen::VectorXd vec = embed_sentence(tokens, table);
  CHECK(vec(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(vec(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(table.misses() == 0);
}

TEST_CASE("embed_sentence honors the configured n-gram order") {
  EmbeddingTable table = table_from(
      "3 2\n"
      "the 1 0\n"
      "dog 0 1\n"
      "the_dog 1 1\n");
  table.set_ngram_order(1);
  const std::vector<std::string> tokens = {"the", "dog"};
  const Eigen::VectorXd vec = embed_sentence(tokens, table);
  CHECK(vec(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(vec(1) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(table.set_ngram_order(0), ValidationError);
}

TEST_CASE("embed_sentence with no known constituent is zero and counts a miss") {
  const EmbeddingTable table = table_from("1 2\nthe 1 0\n");
  const std::vector<std::string> tokens = {"unknown", "words"};
  const Eigen::VectorXd vec = embed_sentence(tokens, table);
  CHECK(vec.isZero());
  CHECK(table.misses() == 1);
  CHECK(embed_sentence(std::vector<std::string>{}, table).isZero());
  CHECK(table.misses() == 2);
}

TEST_CASE("FileSentimentProvider indexes utterance vectors and counts misses") {
  std::istringstream in(
      "m1 0 0.5 -0.25\n"
      "m1 1 0 1\n");
  const FileSentimentProvider provider = FileSentimentProvider::load(in);
  CHECK(provider.dimension() == 2);

  Utterance utt;
  utt.movie_id = "m1";
  utt.index = 0;
  CHECK(provider.vector_for(utt)(1) == -0.25);
  utt.index = 7;
  CHECK(provider.vector_for(utt).isZero());
  CHECK(provider.misses() == 1);
}

TEST_CASE("FileSentimentProvider rejects inconsistent dimensions") {
  std::istringstream in(
      "m1 0 0.5 -0.25\n"
      "m1 1 0.5\n");
  CHECK_THROWS_WITH_AS(FileSentimentProvider::load(in), doctest::Contains("inconsistent"),
                       ValidationError);
}

TEST_CASE("BilstmSentimentProvider encodes with both directions, deterministically") {
  auto table = std::make_shared<EmbeddingTable>(table_from(
      "2 2\n"
      "run 0.5 -0.5\n"
      "fast 0.25 1\n"));
  auto params = std::make_shared<BiLstmParams>(BiLstmParams::init(2, 3, 42));
  const BilstmSentimentProvider provider(params, table);
  CHECK(provider.dimension() == 6);

  Utterance utt;
  utt.movie_id = "m1";
  utt.index = 0;
  utt.tokens = {"run", "fast"};
  const Eigen::VectorXd once = provider.vector_for(utt);
  const Eigen::VectorXd twice = provider.vector_for(utt);
  CHECK(once == twice);
  CHECK(once.size() == 6);
  CHECK_FALSE(once.isZero());

  Utterance empty;
  empty.movie_id = "m1";
  empty.index = 1;
  CHECK(provider.vector_for(empty).isZero());
}

TEST_CASE("bilstm matches a scalar transcription on a 1x1 configuration") {
  BiLstmParams params = BiLstmParams::init(1, 1, 7);
  const auto scalar_of = [](const LstmParams& p) {
    return oracle::ScalarLstm{p.w_input(0, 0),  p.u_input(0, 0),  p.b_input(0),
                              p.w_forget(0, 0), p.u_forget(0, 0), p.b_forget(0),
                              p.w_output(0, 0), p.u_output(0, 0), p.b_output(0),
                              p.w_cand(0, 0),   p.u_cand(0, 0),   p.b_cand(0)};
  };

  Eigen::MatrixXd xs(3, 1);
  xs << 0.3, -0.7, 1.1;
  const Eigen::VectorXd encoded = bilstm_forward(xs, params);

  double h = 0.0;
  double c = 0.0;
  const oracle::ScalarLstm forward = scalar_of(params.forward);
  for (int t = 0; t < 3; ++t) forward.step(xs(t, 0), h, c);
  CHECK(encoded(0) == doctest::Approx(h).epsilon(1e-14));

  h = 0.0;
  c = 0.0;
  const oracle::ScalarLstm backward = scalar_of(params.backward);
  for (int t = 2; t >= 0; --t) backward.step(xs(t, 0), h, c);
  CHECK(encoded(1) == doctest::Approx(h).epsilon(1e-14));

  CHECK_THROWS_WITH_AS(bilstm_forward(Eigen::MatrixXd(0, 1), params),
                       doctest::Contains("empty"), ValidationError);
}

TEST_CASE("encode_genres produces multi-hot bits over the vocabulary") {
  const std::vector<std::string> vocabulary = {"Action", "Crime", "Drama"};
  std::atomic<std::size_t> warnings{0};
  const GenreVector encoded = encode_genres({"Action", "Drama"}, vocabulary, &warnings);
  REQUIRE(encoded.bits.size() == 3);
  CHECK(encoded.bits(0) == 1.0);
  CHECK(encoded.bits(1) == 0.0);
  CHECK(encoded.bits(2) == 1.0);
  CHECK(warnings == 0);

  const GenreVector with_unknown = encode_genres({"Western"}, vocabulary, &warnings);
  CHECK(with_unknown.bits.isZero());
  CHECK(warnings == 1);
}

TEST_CASE("load_genre_vocabulary sorts and deduplicates") {
  std::istringstream in("Drama\nAction\n\n  Crime \nAction\n");
  CHECK(load_genre_vocabulary(in) == std::vector<std::string>{"Action", "Crime", "Drama"});
}

TEST_CASE("make_feature concatenates and rejects non-finite entries") {
  Eigen::VectorXd semantic(2);
  semantic << 1.0, 2.0;
  Eigen::VectorXd sentiment(1);
  sentiment << -3.0;
  const UtteranceFeature feature = make_feature(semantic, sentiment);
  REQUIRE(feature.combined.size() == 3);
  CHECK(feature.combined(0) == 1.0);
  CHECK(feature.combined(2) == -3.0);

  sentiment(0) = std::nan("");
  CHECK_THROWS_WITH_AS(make_feature(semantic, sentiment), doctest::Contains("non-finite"),
                       ValidationError);
}
