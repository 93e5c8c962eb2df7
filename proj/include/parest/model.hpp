#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "parest/autodiff.hpp"
#include "parest/encode.hpp"
#include "parest/errors.hpp"
#include "parest/normalize.hpp"
#include "parest/tensor.hpp"

namespace parest {

struct ModelConfig {
  int length = 64;       // L, input sequence length (grid rows)
  int dims = 64;         // K, embedding size (grid cols)
  int n_layers = 2;
  int n_heads = 4;
  int ffn_dim = 256;
  int n_params_out = 1;  // P
  bool positional_embeddings = true;

  static ModelConfig desk(int n_params_out) {
    ModelConfig c;
    c.n_params_out = n_params_out;
    return c;
  }

  static ModelConfig paper_full(int n_params_out) {
    return {1024, 384, 6, 12, 1536, n_params_out, true};
  }

  void validate() const {
    if (length < 1 || dims < 2 || n_layers < 1 || ffn_dim < 1) {
      throw std::invalid_argument("ModelConfig: bad dimensions");
    }
    if (n_heads < 1 || dims % n_heads != 0) {
      throw std::invalid_argument("ModelConfig: dims must divide by heads");
    }
    if (n_params_out != 1 && n_params_out != 2) {
      throw std::invalid_argument("ModelConfig: n_params_out must be 1 or 2");
    }
  }

  bool operator==(const ModelConfig&) const = default;
};

// Pre-norm encoder: x += MHA(LN(x)); x += FFN(LN(x)); a final LN feeds the
// affine head on the position-0 output embedding.
template <typename T>
struct ModelState {
  struct Layer {
    Tensor<T> ln1_g, ln1_b;
    Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
    Tensor<T> ln2_g, ln2_b;
    Tensor<T> w1, b1, w2, b2;
  };

  ModelConfig config;
  Tensor<T> pos_emb;  // [L, K], zero when positional_embeddings is off
  std::vector<Layer> layers;
  Tensor<T> lnf_g, lnf_b;
  Tensor<T> head_w, head_b;  // [K, P], [1, P]
  std::int64_t examples_seen = 0;

  // Declaration order; checkpointing, the optimizer, and gradient probing
  // all rely on this order being stable.
  std::vector<Tensor<T>*> params() {
    std::vector<Tensor<T>*> out;
    out.push_back(&pos_emb);
    for (Layer& l : layers) {
      for (Tensor<T>* t :
           {&l.ln1_g, &l.ln1_b, &l.wq, &l.bq, &l.wk, &l.bk, &l.wv, &l.bv,
            &l.wo, &l.bo, &l.ln2_g, &l.ln2_b, &l.w1, &l.b1, &l.w2, &l.b2}) {
        out.push_back(t);
      }
    }
    out.push_back(&lnf_g);
    out.push_back(&lnf_b);
    out.push_back(&head_w);
    out.push_back(&head_b);
    return out;
  }

  std::vector<const Tensor<T>*> params() const {
    auto mutable_list = const_cast<ModelState*>(this)->params();
    return {mutable_list.begin(), mutable_list.end()};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const Tensor<T>* t : params()) n += t->size();
    return n;
  }

  template <typename U>
  ModelState<U> cast() const {
    ModelState<U> out;
    out.config = config;
    out.examples_seen = examples_seen;
    out.pos_emb = pos_emb.template cast<U>();
    for (const Layer& l : layers) {
      typename ModelState<U>::Layer o;
      o.ln1_g = l.ln1_g.template cast<U>();
      o.ln1_b = l.ln1_b.template cast<U>();
      o.wq = l.wq.template cast<U>();
      o.bq = l.bq.template cast<U>();
      o.wk = l.wk.template cast<U>();
      o.bk = l.bk.template cast<U>();
      o.wv = l.wv.template cast<U>();
      o.bv = l.bv.template cast<U>();
      o.wo = l.wo.template cast<U>();
      o.bo = l.bo.template cast<U>();
      o.ln2_g = l.ln2_g.template cast<U>();
      o.ln2_b = l.ln2_b.template cast<U>();
      o.w1 = l.w1.template cast<U>();
      o.b1 = l.b1.template cast<U>();
      o.w2 = l.w2.template cast<U>();
      o.b2 = l.b2.template cast<U>();
      out.layers.push_back(std::move(o));
    }
    out.lnf_g = lnf_g.template cast<U>();
    out.lnf_b = lnf_b.template cast<U>();
    out.head_w = head_w.template cast<U>();
    out.head_b = head_b.template cast<U>();
    return out;
  }
};

inline constexpr double kInitStd = 0.02;

// Scaled-normal init (std 0.02) for projections and positional embeddings;
// unit gains / zero biases for the layer norms. Deterministic per seed.
template <typename T = float>
ModelState<T> init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng = Rng::derive(seed, 0x6d6f64656cULL);  // "model" stream
  ModelState<T> s;
  s.config = config;
  const int K = config.dims;
  const T std_dev = static_cast<T>(kInitStd);
  s.pos_emb = config.positional_embeddings
                  ? Tensor<T>::randn(config.length, K, std_dev, rng)
                  : Tensor<T>::zeros(config.length, K);
  for (int i = 0; i < config.n_layers; ++i) {
    typename ModelState<T>::Layer l;
    l.ln1_g = Tensor<T>::full(1, K, T(1));
    l.ln1_b = Tensor<T>::zeros(1, K);
    l.wq = Tensor<T>::randn(K, K, std_dev, rng);
    l.bq = Tensor<T>::zeros(1, K);
    l.wk = Tensor<T>::randn(K, K, std_dev, rng);
    l.bk = Tensor<T>::zeros(1, K);
    l.wv = Tensor<T>::randn(K, K, std_dev, rng);
    l.bv = Tensor<T>::zeros(1, K);
    l.wo = Tensor<T>::randn(K, K, std_dev, rng);
    l.bo = Tensor<T>::zeros(1, K);
    l.ln2_g = Tensor<T>::full(1, K, T(1));
    l.ln2_b = Tensor<T>::zeros(1, K);
    l.w1 = Tensor<T>::randn(K, config.ffn_dim, std_dev, rng);
    l.b1 = Tensor<T>::zeros(1, config.ffn_dim);
    l.w2 = Tensor<T>::randn(config.ffn_dim, K, std_dev, rng);
    l.b2 = Tensor<T>::zeros(1, K);
    s.layers.push_back(std::move(l));
  }
  s.lnf_g = Tensor<T>::full(1, K, T(1));
  s.lnf_b = Tensor<T>::zeros(1, K);
  s.head_w = Tensor<T>::randn(K, config.n_params_out, std_dev, rng);
  s.head_b = Tensor<T>::zeros(1, config.n_params_out);
  return s;
}

// Parameter leaves registered on a tape, in params() order.
template <typename T>
std::vector<typename Tape<T>::Ref> register_params(Tape<T>& tape,
                                                   ModelState<T>& state) {
  std::vector<typename Tape<T>::Ref> refs;
  for (Tensor<T>* p : state.params()) refs.push_back(tape.input(*p));
  return refs;
}

template <typename T>
Tensor<T> grid_tensor(const EncodedGrid& grid) {
  Tensor<T> t(grid.shape.length, grid.shape.dims);
  for (std::size_t i = 0; i < grid.weights.size(); ++i) {
    t.data[i] = static_cast<T>(grid.weights[i]);
  }
  return t;
}

// Forward graph for one grid; returns the [1, P] raw output node.
template <typename T>
typename Tape<T>::Ref build_forward(
    Tape<T>& tape, const ModelConfig& config,
    const std::vector<typename Tape<T>::Ref>& param_refs,
    typename Tape<T>::Ref grid_ref) {
  using Ref = typename Tape<T>::Ref;
  const Tensor<T>& g = tape.value(grid_ref);
  if (g.rows != config.length || g.cols != config.dims) {
    throw ShapeError("forward: grid shape mismatch");
  }
  const int head_dim = config.dims / config.n_heads;
  const T inv_sqrt_d = T(1) / std::sqrt(static_cast<T>(head_dim));

  std::size_t pi = 0;
  const Ref pos_emb = param_refs[pi++];
  Ref x = config.positional_embeddings ? tape.add(grid_ref, pos_emb)
                                       : grid_ref;
  for (int layer = 0; layer < config.n_layers; ++layer) {
    const Ref ln1_g = param_refs[pi++], ln1_b = param_refs[pi++];
    const Ref wq = param_refs[pi++], bq = param_refs[pi++];
    const Ref wk = param_refs[pi++], bk = param_refs[pi++];
    const Ref wv = param_refs[pi++], bv = param_refs[pi++];
    const Ref wo = param_refs[pi++], bo = param_refs[pi++];
    const Ref ln2_g = param_refs[pi++], ln2_b = param_refs[pi++];
    const Ref w1 = param_refs[pi++], b1 = param_refs[pi++];
    const Ref w2 = param_refs[pi++], b2 = param_refs[pi++];

    const Ref normed = tape.layer_norm(x, ln1_g, ln1_b);
    const Ref q = tape.add_rowvec(tape.matmul(normed, wq), bq);
    const Ref k = tape.add_rowvec(tape.matmul(normed, wk), bk);
    const Ref v = tape.add_rowvec(tape.matmul(normed, wv), bv);
    std::vector<Ref> heads;
    for (int h = 0; h < config.n_heads; ++h) {
      const int c0 = h * head_dim;
      const int c1 = c0 + head_dim;
      const Ref qh = tape.slice_cols(q, c0, c1);
      const Ref kh = tape.slice_cols(k, c0, c1);
      const Ref vh = tape.slice_cols(v, c0, c1);
      const Ref scores = tape.scale(tape.matmul_nt(qh, kh), inv_sqrt_d);
      const Ref attn = tape.softmax_rows(scores);
      heads.push_back(tape.matmul(attn, vh));
    }
    const Ref mha = tape.add_rowvec(tape.matmul(tape.concat_cols(heads), wo),
                                    bo);
    x = tape.add(x, mha);

    const Ref normed2 = tape.layer_norm(x, ln2_g, ln2_b);
    const Ref hidden = tape.gelu(tape.add_rowvec(tape.matmul(normed2, w1), b1));
    const Ref ffn = tape.add_rowvec(tape.matmul(hidden, w2), b2);
    x = tape.add(x, ffn);
  }
  const Ref lnf_g = param_refs[pi++], lnf_b = param_refs[pi++];
  const Ref head_w = param_refs[pi++], head_b = param_refs[pi++];
  const Ref final_norm = tape.layer_norm(x, lnf_g, lnf_b);
  const Ref first = tape.row(final_norm, 0);
  return tape.add_rowvec(tape.matmul(first, head_w), head_b);
}

// Inference: raw model output (model units) for one grid.
template <typename T>
ParamVector forward(ModelState<T>& state, const EncodedGrid& grid) {
  Tape<T> tape;
  auto refs = register_params(tape, state);
  const auto grid_ref = tape.input(grid_tensor<T>(grid));
  const auto out = build_forward(tape, state.config, refs, grid_ref);
  const Tensor<T>& o = tape.value(out);
  ParamVector result;
  for (int j = 0; j < o.cols; ++j) {
    result.push_back(static_cast<double>(o.at(0, j)));
  }
  return result;
}

// Loss node: recover raw outputs to original units through the record's
// affine map, then mean squared error against the true parameters. The
// recovery is affine, so gradients flow through it.
template <typename T>
typename Tape<T>::Ref build_loss(Tape<T>& tape, typename Tape<T>::Ref raw,
                                 const NormRecord& record,
                                 const ParamVector& true_params) {
  const Tensor<T>& r = tape.value(raw);
  const int p = static_cast<int>(true_params.size());
  if (r.rows != 1 || r.cols != p) throw ShapeError("loss: arity mismatch");
  const RecoveryAffine aff = recovery_affine(record);
  Tensor<T> mult(1, p), add(1, p), target(1, p);
  for (int j = 0; j < p; ++j) {
    mult.at(0, j) = static_cast<T>(aff.mult[j]);
    add.at(0, j) = static_cast<T>(aff.add[j]);
    target.at(0, j) = static_cast<T>(true_params[j]);
  }
  const auto recovered = tape.affine_const(raw, mult, add);
  return tape.mean_sq_error(recovered, target);
}

// Scalar loss value for (family, record, raw prediction, truth), no tape.
inline double loss_value(Family family, const NormRecord& record,
                         const ParamVector& raw,
                         const ParamVector& true_params) {
  if (raw.size() != true_params.size()) {
    throw ShapeError("loss: arity mismatch");
  }
  const ParamVector est = recover_params(family, record, raw);
  double acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double d = est[i] - true_params[i];
    acc += d * d;
  }
  return acc / static_cast<double>(est.size());
}

// --- checkpoint format ------------------------------------------------
//
// magic "PFCK", u32 version, config block (7 x i32 + u8 flag), i64
// examples_seen, then every parameter tensor in declaration order as
// (i32 rows, i32 cols, rows*cols little-endian float32). Round trip is
// bit-exact for float states.

inline constexpr char kCheckpointMagic[4] = {'P', 'F', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename V>
void write_pod(std::ostream& os, V v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(V));
}

template <typename V>
V read_pod(std::istream& is) {
  V v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(V));
  if (!is) throw CheckpointError("checkpoint: truncated file");
  return v;
}

}  // namespace detail

inline void save_checkpoint(const ModelState<float>& state,
                            const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("checkpoint: cannot open " + path);
  os.write(kCheckpointMagic, 4);
  detail::write_pod(os, kCheckpointVersion);
  const ModelConfig& c = state.config;
  for (std::int32_t v :
       {c.length, c.dims, c.n_layers, c.n_heads, c.ffn_dim, c.n_params_out}) {
    detail::write_pod(os, v);
  }
  detail::write_pod<std::uint8_t>(os, c.positional_embeddings ? 1 : 0);
  detail::write_pod<std::int64_t>(os, state.examples_seen);
  for (const Tensor<float>* t : state.params()) {
    detail::write_pod<std::int32_t>(os, t->rows);
    detail::write_pod<std::int32_t>(os, t->cols);
    os.write(reinterpret_cast<const char*>(t->data.data()),
             static_cast<std::streamsize>(t->data.size() * sizeof(float)));
  }
  if (!os) throw CheckpointError("checkpoint: write failed for " + path);
}

inline ModelState<float> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw CheckpointError("checkpoint: bad magic");
  }
  if (detail::read_pod<std::uint32_t>(is) != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version");
  }
  ModelConfig c;
  c.length = detail::read_pod<std::int32_t>(is);
  c.dims = detail::read_pod<std::int32_t>(is);
  c.n_layers = detail::read_pod<std::int32_t>(is);
  c.n_heads = detail::read_pod<std::int32_t>(is);
  c.ffn_dim = detail::read_pod<std::int32_t>(is);
  c.n_params_out = detail::read_pod<std::int32_t>(is);
  c.positional_embeddings = detail::read_pod<std::uint8_t>(is) != 0;
  const std::int64_t examples_seen = detail::read_pod<std::int64_t>(is);
  ModelState<float> state = init_model<float>(c, 0);
  state.examples_seen = examples_seen;
  for (Tensor<float>* t : state.params()) {
    const std::int32_t rows = detail::read_pod<std::int32_t>(is);
    const std::int32_t cols = detail::read_pod<std::int32_t>(is);
    if (rows != t->rows || cols != t->cols) {
      throw CheckpointError("checkpoint: tensor shape mismatch");
    }
    is.read(reinterpret_cast<char*>(t->data.data()),
            static_cast<std::streamsize>(t->data.size() * sizeof(float)));
    if (!is) throw CheckpointError("checkpoint: truncated tensor data");
  }
  return state;
}

}  // namespace parest
