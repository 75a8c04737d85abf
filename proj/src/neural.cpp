#include "sva/neural.hpp"

#include <cmath>
#include <string>

namespace sva {

namespace {

VectorXd sigmoid(const VectorXd& v) {
  return (1.0 / (1.0 + (-v.array()).exp())).matrix();
}

MatrixXd uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = rng.uniform(-0.08, 0.08);
    }
  }
  return m;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

// Everything the backward pass needs from one window's forward run.
struct ForwardCache {
  MatrixXd xs;        // T x D
  VectorXd genre;     // G
  MatrixXd hs;        // T x H, hidden state after each step
  MatrixXd zs, rs, cands;  // T x H, gate activations
  MatrixXd attn_tanh;      // T x A, tanh(W h_t + b)
  VectorXd weights;        // T
  VectorXd context;        // H
  VectorXd mask;           // H + G dropout scales (all ones when disabled)
  VectorXd dropped;        // mask .* (context ++ genre)
  VectorXd probs;          // 3
};

ForwardCache forward_window(const MatrixXd& xs, const VectorXd& genre, const ModelParams& m,
                            const VectorXd* dropout_mask) {
  const int hidden = m.hidden_dim();
  const int attn = m.attn_dim();
  const Eigen::Index steps = xs.rows();
  require(steps >= 1, "classifier: empty window");
  require(xs.cols() == m.input_dim(),
          "classifier: window feature dimension " + std::to_string(xs.cols()) +
              " does not match model input dimension " + std::to_string(m.input_dim()));
  require(genre.size() == m.genre_dim(),
          "classifier: genre dimension " + std::to_string(genre.size()) +
              " does not match model genre dimension " + std::to_string(m.genre_dim()));

  ForwardCache cache;
  cache.xs = xs;
  cache.genre = genre;
  cache.hs.resize(steps, hidden);
  cache.zs.resize(steps, hidden);
  cache.rs.resize(steps, hidden);
  cache.cands.resize(steps, hidden);
  cache.attn_tanh.resize(steps, attn);

  VectorXd h = VectorXd::Zero(hidden);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const VectorXd x = xs.row(t).transpose();
    const VectorXd z = sigmoid(m.gru.w_update * x + m.gru.u_update * h + m.gru.b_update);
    const VectorXd r = sigmoid(m.gru.w_reset * x + m.gru.u_reset * h + m.gru.b_reset);
    const VectorXd cand =
        (m.gru.w_cand * x + m.gru.u_cand * r.cwiseProduct(h) + m.gru.b_cand).array().tanh();
    h = z.cwiseProduct(h) + (VectorXd::Ones(hidden) - z).cwiseProduct(cand);
    cache.zs.row(t) = z.transpose();
    cache.rs.row(t) = r.transpose();
    cache.cands.row(t) = cand.transpose();
    cache.hs.row(t) = h.transpose();
  }

  VectorXd scores(steps);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const VectorXd mt =
        (m.attention.proj * cache.hs.row(t).transpose() + m.attention.proj_bias).array().tanh();
    cache.attn_tanh.row(t) = mt.transpose();
    scores(t) = m.attention.score.dot(mt);
  }
  cache.weights = softmax(scores);
  cache.context = cache.hs.transpose() * cache.weights;

  VectorXd concat(hidden + genre.size());
  concat << cache.context, genre;
  if (dropout_mask != nullptr) {
    require(dropout_mask->size() == concat.size(), "classifier: dropout mask size mismatch");
    cache.mask = *dropout_mask;
  } else {
    cache.mask = VectorXd::Ones(concat.size());
  }
  cache.dropped = cache.mask.cwiseProduct(concat);
  cache.probs = softmax(m.output.weight * cache.dropped + m.output.bias);
  return cache;
}

// Accumulates d(scale * -log p[gold]) into grads.
void backward_window(const ForwardCache& cache, const ModelParams& m, ViolenceLabel gold,
                     double scale, ModelParams& grads) {
  const Eigen::Index steps = cache.xs.rows();
  const int hidden = m.hidden_dim();

  Eigen::Vector3d dlogits = cache.probs;
  dlogits(static_cast<int>(gold)) -= 1.0;
  dlogits *= scale;

  grads.output.weight += dlogits * cache.dropped.transpose();
  grads.output.bias += dlogits;

  const VectorXd ddropped = m.output.weight.transpose() * dlogits;
  const VectorXd dconcat = cache.mask.cwiseProduct(ddropped);
  const VectorXd dcontext = dconcat.head(hidden);

  // context = hs^T weights
  const VectorXd dweights = cache.hs * dcontext;
  const double mixed = cache.weights.dot(dweights);
  const VectorXd dscores =
      cache.weights.cwiseProduct(dweights - VectorXd::Constant(steps, mixed));
  MatrixXd dhs = cache.weights * dcontext.transpose();  // T x H

  for (Eigen::Index t = 0; t < steps; ++t) {
    const VectorXd mt = cache.attn_tanh.row(t).transpose();
    grads.attention.score += dscores(t) * mt;
    const VectorXd dpre =
        dscores(t) * m.attention.score.cwiseProduct((1.0 - mt.array().square()).matrix());
    grads.attention.proj += dpre * cache.hs.row(t);
    grads.attention.proj_bias += dpre;
    dhs.row(t) += (m.attention.proj.transpose() * dpre).transpose();
  }

  VectorXd dh = VectorXd::Zero(hidden);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    dh += dhs.row(t).transpose();
    const VectorXd hprev =
        t > 0 ? VectorXd(cache.hs.row(t - 1).transpose()) : VectorXd(VectorXd::Zero(hidden));
    const VectorXd z = cache.zs.row(t).transpose();
    const VectorXd r = cache.rs.row(t).transpose();
    const VectorXd cand = cache.cands.row(t).transpose();
    const VectorXd x = cache.xs.row(t).transpose();

    const VectorXd dz = dh.cwiseProduct(hprev - cand);
    const VectorXd dcand = dh.cwiseProduct(VectorXd::Ones(hidden) - z);
    VectorXd dhprev = dh.cwiseProduct(z);

    const VectorXd dcand_pre = dcand.cwiseProduct((1.0 - cand.array().square()).matrix());
    grads.gru.w_cand += dcand_pre * x.transpose();
    grads.gru.u_cand += dcand_pre * r.cwiseProduct(hprev).transpose();
    grads.gru.b_cand += dcand_pre;
    const VectorXd drh = m.gru.u_cand.transpose() * dcand_pre;
    const VectorXd dr = drh.cwiseProduct(hprev);
    dhprev += drh.cwiseProduct(r);

    const VectorXd dr_pre = dr.cwiseProduct(r.cwiseProduct(VectorXd::Ones(hidden) - r));
    grads.gru.w_reset += dr_pre * x.transpose();
    grads.gru.u_reset += dr_pre * hprev.transpose();
    grads.gru.b_reset += dr_pre;
    dhprev += m.gru.u_reset.transpose() * dr_pre;

    const VectorXd dz_pre = dz.cwiseProduct(z.cwiseProduct(VectorXd::Ones(hidden) - z));
    grads.gru.w_update += dz_pre * x.transpose();
    grads.gru.u_update += dz_pre * hprev.transpose();
    grads.gru.b_update += dz_pre;
    dhprev += m.gru.u_update.transpose() * dz_pre;

    dh = dhprev;
  }
}

}  // namespace

ModelParams ModelParams::init(int input_dim, int hidden_dim, int attn_dim, int genre_dim,
                              std::uint64_t seed) {
  require(input_dim > 0 && hidden_dim > 0 && attn_dim > 0 && genre_dim >= 0,
          "model: dimensions must be positive (genre may be zero)");
  Rng rng(seed);
  ModelParams m;
  m.rng_seed = seed;
  m.gru.w_update = uniform_matrix(rng, hidden_dim, input_dim);
  m.gru.w_reset = uniform_matrix(rng, hidden_dim, input_dim);
  m.gru.w_cand = uniform_matrix(rng, hidden_dim, input_dim);
  m.gru.u_update = uniform_matrix(rng, hidden_dim, hidden_dim);
  m.gru.u_reset = uniform_matrix(rng, hidden_dim, hidden_dim);
  m.gru.u_cand = uniform_matrix(rng, hidden_dim, hidden_dim);
  m.gru.b_update = VectorXd::Zero(hidden_dim);
  m.gru.b_reset = VectorXd::Zero(hidden_dim);
  m.gru.b_cand = VectorXd::Zero(hidden_dim);
  m.attention.proj = uniform_matrix(rng, attn_dim, hidden_dim);
  m.attention.proj_bias = VectorXd::Zero(attn_dim);
  m.attention.score = uniform_matrix(rng, attn_dim, 1).col(0);
  m.output.weight = uniform_matrix(rng, 3, hidden_dim + genre_dim);
  m.output.bias = VectorXd::Zero(3);
  return m;
}

ModelParams ModelParams::zeros_like(const ModelParams& shape) {
  ModelParams m;
  m.rng_seed = shape.rng_seed;
  m.gru.w_update = MatrixXd::Zero(shape.gru.w_update.rows(), shape.gru.w_update.cols());
  m.gru.w_reset = m.gru.w_update;
  m.gru.w_cand = m.gru.w_update;
  m.gru.u_update = MatrixXd::Zero(shape.gru.u_update.rows(), shape.gru.u_update.cols());
  m.gru.u_reset = m.gru.u_update;
  m.gru.u_cand = m.gru.u_update;
  m.gru.b_update = VectorXd::Zero(shape.gru.b_update.size());
  m.gru.b_reset = m.gru.b_update;
  m.gru.b_cand = m.gru.b_update;
  m.attention.proj = MatrixXd::Zero(shape.attention.proj.rows(), shape.attention.proj.cols());
  m.attention.proj_bias = VectorXd::Zero(shape.attention.proj_bias.size());
  m.attention.score = VectorXd::Zero(shape.attention.score.size());
  m.output.weight = MatrixXd::Zero(shape.output.weight.rows(), shape.output.weight.cols());
  m.output.bias = VectorXd::Zero(shape.output.bias.size());
  return m;
}

namespace {

template <typename Params, typename Ref>
std::vector<Ref> tensor_list(Params& m) {
  std::vector<Ref> refs;
  refs.reserve(14);
  refs.push_back({"w_update", m.gru.w_update});
  refs.push_back({"w_reset", m.gru.w_reset});
  refs.push_back({"w_cand", m.gru.w_cand});
  refs.push_back({"u_update", m.gru.u_update});
  refs.push_back({"u_reset", m.gru.u_reset});
  refs.push_back({"u_cand", m.gru.u_cand});
  refs.push_back({"b_update", m.gru.b_update});
  refs.push_back({"b_reset", m.gru.b_reset});
  refs.push_back({"b_cand", m.gru.b_cand});
  refs.push_back({"attn_proj", m.attention.proj});
  refs.push_back({"attn_bias", m.attention.proj_bias});
  refs.push_back({"attn_score", m.attention.score});
  refs.push_back({"out_weight", m.output.weight});
  refs.push_back({"out_bias", m.output.bias});
  return refs;
}

}  // namespace

std::vector<TensorRef> tensors(ModelParams& params) {
  return tensor_list<ModelParams, TensorRef>(params);
}

std::vector<ConstTensorRef> tensors(const ModelParams& params) {
  return tensor_list<const ModelParams, ConstTensorRef>(params);
}

VectorXd gru_step(const VectorXd& x, const VectorXd& h, const GruParams& p) {
  require(x.size() == p.input_dim(), "gru: input dimension mismatch");
  require(h.size() == p.hidden_dim(), "gru: hidden dimension mismatch");
  const VectorXd z = sigmoid(p.w_update * x + p.u_update * h + p.b_update);
  const VectorXd r = sigmoid(p.w_reset * x + p.u_reset * h + p.b_reset);
  const VectorXd cand = (p.w_cand * x + p.u_cand * r.cwiseProduct(h) + p.b_cand).array().tanh();
  return z.cwiseProduct(h) + (VectorXd::Ones(h.size()) - z).cwiseProduct(cand);
}

LstmParams LstmParams::init(int input_dim, int hidden_dim, std::uint64_t seed) {
  require(input_dim > 0 && hidden_dim > 0, "lstm: dimensions must be positive");
  Rng rng(seed);
  LstmParams p;
  p.w_input = uniform_matrix(rng, hidden_dim, input_dim);
  p.w_forget = uniform_matrix(rng, hidden_dim, input_dim);
  p.w_output = uniform_matrix(rng, hidden_dim, input_dim);
  p.w_cand = uniform_matrix(rng, hidden_dim, input_dim);
  p.u_input = uniform_matrix(rng, hidden_dim, hidden_dim);
  p.u_forget = uniform_matrix(rng, hidden_dim, hidden_dim);
  p.u_output = uniform_matrix(rng, hidden_dim, hidden_dim);
  p.u_cand = uniform_matrix(rng, hidden_dim, hidden_dim);
  p.b_input = VectorXd::Zero(hidden_dim);
  p.b_forget = VectorXd::Zero(hidden_dim);
  p.b_output = VectorXd::Zero(hidden_dim);
  p.b_cand = VectorXd::Zero(hidden_dim);
  return p;
}

BiLstmParams BiLstmParams::init(int input_dim, int hidden_dim, std::uint64_t seed) {
  BiLstmParams p;
  p.forward = LstmParams::init(input_dim, hidden_dim, mix_seed(seed, 0));
  p.backward = LstmParams::init(input_dim, hidden_dim, mix_seed(seed, 1));
  return p;
}

VectorXd bilstm_forward(const MatrixXd& xs, const BiLstmParams& p) {
  require(xs.rows() >= 1, "bilstm: empty sequence");
  require(xs.cols() == p.forward.input_dim() && xs.cols() == p.backward.input_dim(),
          "bilstm: input dimension mismatch");
  require(p.forward.hidden_dim() == p.backward.hidden_dim(),
          "bilstm: direction hidden sizes differ");

  const auto run = [&xs](const LstmParams& q, bool reverse) {
    const int hidden = q.hidden_dim();
    VectorXd h = VectorXd::Zero(hidden);
    VectorXd c = VectorXd::Zero(hidden);
    const Eigen::Index steps = xs.rows();
    for (Eigen::Index t = 0; t < steps; ++t) {
      const Eigen::Index idx = reverse ? steps - 1 - t : t;
      const VectorXd x = xs.row(idx).transpose();
      const VectorXd in = sigmoid(q.w_input * x + q.u_input * h + q.b_input);
      const VectorXd forget = sigmoid(q.w_forget * x + q.u_forget * h + q.b_forget);
      const VectorXd out = sigmoid(q.w_output * x + q.u_output * h + q.b_output);
      const VectorXd cand = (q.w_cand * x + q.u_cand * h + q.b_cand).array().tanh();
      c = forget.cwiseProduct(c) + in.cwiseProduct(cand);
      h = out.cwiseProduct(c.array().tanh().matrix());
    }
    return h;
  };

  VectorXd result(2 * p.forward.hidden_dim());
  result << run(p.forward, false), run(p.backward, true);
  return result;
}

AttentionResult attention(const MatrixXd& hidden_states, const AttentionParams& p) {
  require(hidden_states.rows() >= 1, "attention: empty sequence");
  require(hidden_states.cols() == p.proj.cols(), "attention: hidden dimension mismatch");
  const Eigen::Index steps = hidden_states.rows();
  VectorXd scores(steps);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const VectorXd mt =
        (p.proj * hidden_states.row(t).transpose() + p.proj_bias).array().tanh();
    scores(t) = p.score.dot(mt);
  }
  AttentionResult result;
  result.weights = softmax(scores);
  result.context = hidden_states.transpose() * result.weights;
  return result;
}

VectorXd softmax(const VectorXd& logits) {
  require(logits.size() >= 1, "softmax: empty input");
  const double peak = logits.maxCoeff();
  Eigen::ArrayXd shifted = (logits.array() - peak).exp();
  return (shifted / shifted.sum()).matrix();
}

VectorXd classify_window(const MatrixXd& window_features, const VectorXd& genre,
                         const ModelParams& m, const VectorXd* dropout_mask) {
  return forward_window(window_features, genre, m, dropout_mask).probs;
}

LossResult loss_and_gradients(const std::vector<BatchItem>& batch, const ModelParams& m,
                              Rng* dropout_rng, double dropout_keep) {
  require(!batch.empty(), "training: empty batch");
  const bool use_dropout = dropout_rng != nullptr && dropout_keep < 1.0;
  require(!use_dropout || dropout_keep > 0.0, "training: dropout keep rate must be in (0, 1]");

  LossResult result;
  result.grads = ModelParams::zeros_like(m);
  const double scale = 1.0 / static_cast<double>(batch.size());
  const Eigen::Index mask_size = m.hidden_dim() + m.genre_dim();

  for (const BatchItem& item : batch) {
    const int gold = static_cast<int>(item.gold);
    require(gold >= 0 && gold <= 2, "training: gold class out of range");
    VectorXd mask;
    const VectorXd* mask_ptr = nullptr;
    if (use_dropout) {
      mask.resize(mask_size);
      for (Eigen::Index i = 0; i < mask_size; ++i) {
        mask(i) = dropout_rng->bernoulli(dropout_keep) ? 1.0 / dropout_keep : 0.0;
      }
      mask_ptr = &mask;
    }
    const ForwardCache cache = forward_window(item.features, item.genre, m, mask_ptr);
    result.loss += -std::log(cache.probs(gold)) * scale;
    backward_window(cache, m, item.gold, scale, result.grads);
  }
  return result;
}

AdamState AdamState::init(const ModelParams& shape, AdamHyper hyper) {
  AdamState state;
  state.hyper = hyper;
  state.first_moment = ModelParams::zeros_like(shape);
  state.second_moment = ModelParams::zeros_like(shape);
  return state;
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state) {
  auto param_refs = tensors(params);
  const auto grad_refs = tensors(grads);
  auto m1_refs = tensors(state.first_moment);
  auto m2_refs = tensors(state.second_moment);
  require(param_refs.size() == grad_refs.size(), "adam: tensor count mismatch");

  for (std::size_t i = 0; i < grad_refs.size(); ++i) {
    require(grad_refs[i].values.rows() == param_refs[i].values.rows() &&
                grad_refs[i].values.cols() == param_refs[i].values.cols(),
            std::string("adam: shape mismatch in ") + param_refs[i].name);
    if (!grad_refs[i].values.allFinite()) {
      throw ValidationError(std::string("diverged-training: non-finite gradient in ") +
                            grad_refs[i].name);
    }
  }

  state.step += 1;
  const AdamHyper& h = state.hyper;
  const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < grad_refs.size(); ++i) {
    auto& p = param_refs[i].values;
    const auto& g = grad_refs[i].values;
    auto& m1 = m1_refs[i].values;
    auto& m2 = m2_refs[i].values;
    m1 = h.beta1 * m1 + (1.0 - h.beta1) * g;
    m2 = (h.beta2 * m2.array() + (1.0 - h.beta2) * g.array().square()).matrix();
    const Eigen::ArrayXXd m_hat = m1.array() / bc1;
    const Eigen::ArrayXXd v_hat = m2.array() / bc2;
    p -= (h.learning_rate * m_hat / (v_hat.sqrt() + h.epsilon)).matrix();
  }
}

double finite_diff_check(const ModelParams& m, const std::vector<BatchItem>& batch,
                         double epsilon) {
  require(epsilon > 0.0, "invalid-epsilon: finite difference step must be > 0");
  const LossResult analytic = loss_and_gradients(batch, m, nullptr, 1.0);

  ModelParams probe = m;
  auto probe_refs = tensors(probe);
  const auto grad_refs = tensors(analytic.grads);

  const auto loss_at = [&batch, &probe]() {
    return loss_and_gradients(batch, probe, nullptr, 1.0).loss;
  };

  double max_rel = 0.0;
  for (std::size_t i = 0; i < probe_refs.size(); ++i) {
    auto& values = probe_refs[i].values;
    const auto& grad = grad_refs[i].values;
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      for (Eigen::Index c = 0; c < values.cols(); ++c) {
        const double saved = values(r, c);
        values(r, c) = saved + epsilon;
        const double plus = loss_at();
        values(r, c) = saved - epsilon;
        const double minus = loss_at();
        values(r, c) = saved;
        const double numeric = (plus - minus) / (2.0 * epsilon);
        const double analytic_value = grad(r, c);
        const double denom =
            std::max({std::abs(analytic_value), std::abs(numeric), 1e-12});
        max_rel = std::max(max_rel, std::abs(analytic_value - numeric) / denom);
      }
    }
  }
  return max_rel;
}

}  // namespace sva
