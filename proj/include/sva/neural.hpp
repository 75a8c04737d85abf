#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "sva/errors.hpp"
#include "sva/rng.hpp"
#include "sva/script.hpp"

namespace sva {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Gated recurrent unit, the z*h + (1-z)*h~ convention:
//   z = sigmoid(Wz x + Uz h + bz)      update gate
//   r = sigmoid(Wr x + Ur h + br)      reset gate
//   h~ = tanh(Wc x + Uc (r.h) + bc)    candidate
//   h' = z.h + (1-z).h~
struct GruParams {
  MatrixXd w_update, w_reset, w_cand;  // H x D
  MatrixXd u_update, u_reset, u_cand;  // H x H
  VectorXd b_update, b_reset, b_cand;  // H

  int input_dim() const { return static_cast<int>(w_update.cols()); }
  int hidden_dim() const { return static_cast<int>(w_update.rows()); }
};

// Additive attention: score_t = v . tanh(W h_t + b).
struct AttentionParams {
  MatrixXd proj;       // A x H
  VectorXd proj_bias;  // A
  VectorXd score;      // A

  int attn_dim() const { return static_cast<int>(proj.rows()); }
};

// Affine map from (attention context ++ genre bits) to the three class
// logits; rows are LOW, MED, HIGH in that fixed order.
struct OutputParams {
  MatrixXd weight;  // 3 x (H + G)
  VectorXd bias;    // 3
};

struct ModelParams {
  GruParams gru;
  AttentionParams attention;
  OutputParams output;
  std::uint64_t rng_seed = 0;

  int input_dim() const { return gru.input_dim(); }
  int hidden_dim() const { return gru.hidden_dim(); }
  int attn_dim() const { return attention.attn_dim(); }
  int genre_dim() const {
    return static_cast<int>(output.weight.cols()) - gru.hidden_dim();
  }

  // Weights uniform in (-0.08, 0.08) drawn from `seed`, biases zero.
  static ModelParams init(int input_dim, int hidden_dim, int attn_dim, int genre_dim,
                          std::uint64_t seed);
  static ModelParams zeros_like(const ModelParams& shape);
};

// One named dense block of a model. Biases appear as n x 1 matrices. The
// order returned by tensors() is the canonical traversal shared by the
// optimizer, the file format and the finite-difference checker.
struct TensorRef {
  const char* name;
  Eigen::Ref<MatrixXd> values;
};
struct ConstTensorRef {
  const char* name;
  Eigen::Ref<const MatrixXd> values;
};
std::vector<TensorRef> tensors(ModelParams& params);
std::vector<ConstTensorRef> tensors(const ModelParams& params);

VectorXd gru_step(const VectorXd& x, const VectorXd& h, const GruParams& p);

// Standard LSTM cell (input, forget, output gates and cell candidate).
struct LstmParams {
  MatrixXd w_input, w_forget, w_output, w_cand;  // H x D
  MatrixXd u_input, u_forget, u_output, u_cand;  // H x H
  VectorXd b_input, b_forget, b_output, b_cand;  // H

  int input_dim() const { return static_cast<int>(w_input.cols()); }
  int hidden_dim() const { return static_cast<int>(w_input.rows()); }

  static LstmParams init(int input_dim, int hidden_dim, std::uint64_t seed);
};

struct BiLstmParams {
  LstmParams forward;
  LstmParams backward;

  static BiLstmParams init(int input_dim, int hidden_dim, std::uint64_t seed);
};

// Runs both directions from zero states over the sequence (rows of `xs`)
// and concatenates their final hidden states. Throws on an empty sequence.
VectorXd bilstm_forward(const MatrixXd& xs, const BiLstmParams& p);

struct AttentionResult {
  VectorXd context;  // H
  VectorXd weights;  // T, softmax of the scores, sums to 1
};

// hidden_states has one row per step (T x H).
AttentionResult attention(const MatrixXd& hidden_states, const AttentionParams& p);

// Numerically stable softmax.
VectorXd softmax(const VectorXd& logits);

// Full classifier forward pass: GRU over the window rows from a zero state,
// attention over all hidden states, genre bits appended, affine + softmax.
// When `dropout_mask` is given (training) it is applied multiplicatively to
// the concatenated vector; entries already carry the inverted-dropout scale.
VectorXd classify_window(const MatrixXd& window_features, const VectorXd& genre,
                         const ModelParams& m, const VectorXd* dropout_mask = nullptr);

struct BatchItem {
  Eigen::Ref<const MatrixXd> features;  // T x D
  Eigen::Ref<const VectorXd> genre;     // G
  ViolenceLabel gold;
};

struct LossResult {
  double loss = 0.0;          // mean of -log p(gold) over the batch
  ModelParams grads;          // exact derivatives given the drawn masks
};

// Mean cross-entropy with inverted-scaling dropout on the concatenated
// (context ++ genre) vector. Masks are Bernoulli(dropout_keep) draws from
// `dropout_rng`, one per batch element, each kept unit scaled by
// 1/dropout_keep. Pass dropout_rng = nullptr (or keep >= 1) to disable.
LossResult loss_and_gradients(const std::vector<BatchItem>& batch, const ModelParams& m,
                              Rng* dropout_rng, double dropout_keep);

struct AdamHyper {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  long step = 0;
  ModelParams first_moment;
  ModelParams second_moment;
  AdamHyper hyper;

  static AdamState init(const ModelParams& shape, AdamHyper hyper = {});
};

// Bias-corrected Adam update, in place. Non-finite gradient entries raise
// a diverged-training error.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state);

// Central finite differences against the analytic gradients, dropout
// disabled. Returns the max relative error over all parameter entries with
// denominator max(|analytic|, |numeric|, 1e-12).
double finite_diff_check(const ModelParams& m, const std::vector<BatchItem>& batch,
                         double epsilon);

// Versioned text model format: header lines format=1, D=, H=, A=, G=,
// seed=, then one `name rows cols` section per tensor with row-major
// shortest-round-trip decimals. Load/save round-trips are byte-identical.
void save_model(std::ostream& out, const ModelParams& m);
ModelParams load_model(std::istream& in);
void save_model_file(const std::string& path, const ModelParams& m);
ModelParams load_model_file(const std::string& path);

}  // namespace sva
