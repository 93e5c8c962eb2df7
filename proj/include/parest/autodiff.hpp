#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "parest/errors.hpp"
#include "parest/tensor.hpp"

namespace parest {

// Reverse-mode tape over 2-D tensors. Each op records its value and a
// closure that scatters the output gradient back to its inputs; backward()
// replays the closures in reverse creation order. One tape per forward
// pass; leaves are parameter or data tensors registered with input().
template <typename T>
class Tape {
 public:
  using Ref = int;

  Ref input(const Tensor<T>& t) { return push(t, nullptr); }

  const Tensor<T>& value(Ref r) const { return nodes_[r].value; }
  const Tensor<T>& grad(Ref r) const { return nodes_[r].grad; }

  Ref matmul(Ref a, Ref b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (A.cols != B.rows) throw ShapeError("matmul: inner dims differ");
    Tensor<T> C(A.rows, B.cols);
    gemm(A, B, C);
    return push(std::move(C), [a, b](Tape& t, const Tensor<T>& g) {
      // dA += G B^T ; dB += A^T G
      const Tensor<T>& A = t.val(a);
      const Tensor<T>& B = t.val(b);
      Tensor<T>& dA = t.nodes_[a].grad;
      Tensor<T>& dB = t.nodes_[b].grad;
      for (int i = 0; i < A.rows; ++i) {
        for (int j = 0; j < B.cols; ++j) {
          const T gij = g.at(i, j);
          if (gij == T(0)) continue;
          for (int k = 0; k < A.cols; ++k) {
            dA.at(i, k) += gij * B.at(k, j);
            dB.at(k, j) += A.at(i, k) * gij;
          }
        }
      }
    });
  }

  // C = A * B^T
  Ref matmul_nt(Ref a, Ref b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (A.cols != B.cols) throw ShapeError("matmul_nt: inner dims differ");
    Tensor<T> C(A.rows, B.rows);
    for (int i = 0; i < A.rows; ++i) {
      for (int j = 0; j < B.rows; ++j) {
        T s = T(0);
        for (int k = 0; k < A.cols; ++k) s += A.at(i, k) * B.at(j, k);
        C.at(i, j) = s;
      }
    }
    return push(std::move(C), [a, b](Tape& t, const Tensor<T>& g) {
      // dA += G B ; dB += G^T A
      const Tensor<T>& A = t.val(a);
      const Tensor<T>& B = t.val(b);
      Tensor<T>& dA = t.nodes_[a].grad;
      Tensor<T>& dB = t.nodes_[b].grad;
      for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) {
          const T gij = g.at(i, j);
          if (gij == T(0)) continue;
          for (int k = 0; k < A.cols; ++k) {
            dA.at(i, k) += gij * B.at(j, k);
            dB.at(j, k) += gij * A.at(i, k);
          }
        }
      }
    });
  }

  Ref add(Ref a, Ref b) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(b);
    if (!A.same_shape(B)) throw ShapeError("add: shape mismatch");
    Tensor<T> C = A;
    for (std::size_t i = 0; i < C.data.size(); ++i) C.data[i] += B.data[i];
    return push(std::move(C), [a, b](Tape& t, const Tensor<T>& g) {
      accumulate(t.nodes_[a].grad, g);
      accumulate(t.nodes_[b].grad, g);
    });
  }

  // Bias [1, c] broadcast over the rows of a.
  Ref add_rowvec(Ref a, Ref bias) {
    const Tensor<T>& A = val(a);
    const Tensor<T>& B = val(bias);
    if (B.rows != 1 || B.cols != A.cols) {
      throw ShapeError("add_rowvec: bias shape mismatch");
    }
    Tensor<T> C = A;
    for (int i = 0; i < C.rows; ++i) {
      for (int j = 0; j < C.cols; ++j) C.at(i, j) += B.at(0, j);
    }
    return push(std::move(C), [a, bias](Tape& t, const Tensor<T>& g) {
      accumulate(t.nodes_[a].grad, g);
      Tensor<T>& dB = t.nodes_[bias].grad;
      for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) dB.at(0, j) += g.at(i, j);
      }
    });
  }

  Ref scale(Ref a, T c) {
    Tensor<T> C = val(a);
    for (T& x : C.data) x *= c;
    return push(std::move(C), [a, c](Tape& t, const Tensor<T>& g) {
      Tensor<T>& dA = t.nodes_[a].grad;
      for (std::size_t i = 0; i < g.data.size(); ++i) dA.data[i] += c * g.data[i];
    });
  }

  Ref slice_cols(Ref a, int c0, int c1) {
    const Tensor<T>& A = val(a);
    if (!(0 <= c0 && c0 < c1 && c1 <= A.cols)) {
      throw ShapeError("slice_cols: bad range");
    }
    Tensor<T> C(A.rows, c1 - c0);
    for (int i = 0; i < A.rows; ++i) {
      for (int j = c0; j < c1; ++j) C.at(i, j - c0) = A.at(i, j);
    }
    return push(std::move(C), [a, c0](Tape& t, const Tensor<T>& g) {
      Tensor<T>& dA = t.nodes_[a].grad;
      for (int i = 0; i < g.rows; ++i) {
        for (int j = 0; j < g.cols; ++j) dA.at(i, j + c0) += g.at(i, j);
      }
    });
  }

  Ref concat_cols(const std::vector<Ref>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: empty");
    const int rows = val(parts[0]).rows;
    int cols = 0;
    for (Ref r : parts) {
      if (val(r).rows != rows) throw ShapeError("concat_cols: row mismatch");
      cols += val(r).cols;
    }
    Tensor<T> C(rows, cols);
    int off = 0;
    for (Ref r : parts) {
      const Tensor<T>& P = val(r);
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < P.cols; ++j) C.at(i, off + j) = P.at(i, j);
      }
      off += P.cols;
    }
    return push(std::move(C), [parts](Tape& t, const Tensor<T>& g) {
      int off = 0;
      for (Ref r : parts) {
        Tensor<T>& dP = t.nodes_[r].grad;
        for (int i = 0; i < dP.rows; ++i) {
          for (int j = 0; j < dP.cols; ++j) dP.at(i, j) += g.at(i, off + j);
        }
        off += dP.cols;
      }
    });
  }

  Ref row(Ref a, int r) {
    const Tensor<T>& A = val(a);
    if (!(0 <= r && r < A.rows)) throw ShapeError("row: out of range");
    Tensor<T> C(1, A.cols);
    for (int j = 0; j < A.cols; ++j) C.at(0, j) = A.at(r, j);
    return push(std::move(C), [a, r](Tape& t, const Tensor<T>& g) {
      Tensor<T>& dA = t.nodes_[a].grad;
      for (int j = 0; j < g.cols; ++j) dA.at(r, j) += g.at(0, j);
    });
  }

  Ref softmax_rows(Ref a) {
    Tensor<T> C = val(a);
    for (int i = 0; i < C.rows; ++i) {
      T mx = C.at(i, 0);
      for (int j = 1; j < C.cols; ++j) mx = std::max(mx, C.at(i, j));
      T sum = T(0);
      for (int j = 0; j < C.cols; ++j) {
        C.at(i, j) = std::exp(C.at(i, j) - mx);
        sum += C.at(i, j);
      }
      for (int j = 0; j < C.cols; ++j) C.at(i, j) /= sum;
    }
    const int id = push(std::move(C), nullptr);
    nodes_[id].backward = [a, id](Tape& t, const Tensor<T>& g) {
      const Tensor<T>& y = t.val(id);
      Tensor<T>& dA = t.nodes_[a].grad;
      for (int i = 0; i < y.rows; ++i) {
        T dot = T(0);
        for (int j = 0; j < y.cols; ++j) dot += g.at(i, j) * y.at(i, j);
        for (int j = 0; j < y.cols; ++j) {
          dA.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
      }
    };
    return id;
  }

  // Per-row normalization to zero mean / unit variance (eps inside the
  // sqrt), then elementwise gain and bias ([1, c] each).
  Ref layer_norm(Ref x, Ref gain, Ref bias) {
    constexpr T eps = T(1e-5);
    const Tensor<T>& X = val(x);
    const Tensor<T>& G = val(gain);
    const Tensor<T>& B = val(bias);
    if (G.rows != 1 || G.cols != X.cols || B.rows != 1 || B.cols != X.cols) {
      throw ShapeError("layer_norm: gain/bias shape mismatch");
    }
    Tensor<T> C(X.rows, X.cols);
    for (int i = 0; i < X.rows; ++i) {
      const T n = static_cast<T>(X.cols);
      T mean = T(0);
      for (int j = 0; j < X.cols; ++j) mean += X.at(i, j);
      mean /= n;
      T var = T(0);
      for (int j = 0; j < X.cols; ++j) {
        const T d = X.at(i, j) - mean;
        var += d * d;
      }
      var /= n;
      const T inv = T(1) / std::sqrt(var + eps);
      for (int j = 0; j < X.cols; ++j) {
        C.at(i, j) = (X.at(i, j) - mean) * inv * G.at(0, j) + B.at(0, j);
      }
    }
    return push(std::move(C), [x, gain, bias](Tape& t, const Tensor<T>& g) {
      constexpr T eps = T(1e-5);
      const Tensor<T>& X = t.val(x);
      const Tensor<T>& G = t.val(gain);
      Tensor<T>& dX = t.nodes_[x].grad;
      Tensor<T>& dG = t.nodes_[gain].grad;
      Tensor<T>& dB = t.nodes_[bias].grad;
      const T n = static_cast<T>(X.cols);
      for (int i = 0; i < X.rows; ++i) {
        T mean = T(0);
        for (int j = 0; j < X.cols; ++j) mean += X.at(i, j);
        mean /= n;
        T var = T(0);
        for (int j = 0; j < X.cols; ++j) {
          const T d = X.at(i, j) - mean;
          var += d * d;
        }
        var /= n;
        const T inv = T(1) / std::sqrt(var + eps);
        // dxhat, and the two row sums the backward formula needs.
        T sum_dxhat = T(0);
        T sum_dxhat_xhat = T(0);
        for (int j = 0; j < X.cols; ++j) {
          const T xhat = (X.at(i, j) - mean) * inv;
          const T dxhat = g.at(i, j) * G.at(0, j);
          dG.at(0, j) += g.at(i, j) * xhat;
          dB.at(0, j) += g.at(i, j);
          sum_dxhat += dxhat;
          sum_dxhat_xhat += dxhat * xhat;
        }
        for (int j = 0; j < X.cols; ++j) {
          const T xhat = (X.at(i, j) - mean) * inv;
          const T dxhat = g.at(i, j) * G.at(0, j);
          dX.at(i, j) +=
              inv * (dxhat - sum_dxhat / n - xhat * sum_dxhat_xhat / n);
        }
      }
    });
  }

  // Exact (erf) form: 0.5 x (1 + erf(x / sqrt(2))).
  Ref gelu(Ref a) {
    Tensor<T> C = val(a);
    for (T& x : C.data) {
      x = T(0.5) * x * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
    }
    return push(std::move(C), [a](Tape& t, const Tensor<T>& g) {
      const Tensor<T>& X = t.val(a);
      Tensor<T>& dA = t.nodes_[a].grad;
      for (std::size_t i = 0; i < X.data.size(); ++i) {
        const T x = X.data[i];
        const T cdf = T(0.5) * (T(1) + std::erf(x / std::numbers::sqrt2_v<T>));
        const T pdf = std::exp(T(-0.5) * x * x) /
                      std::sqrt(T(2) * std::numbers::pi_v<T>);
        dA.data[i] += g.data[i] * (cdf + x * pdf);
      }
    });
  }

  // Elementwise y = mult .* x + add with constant coefficients.
  Ref affine_const(Ref a, const Tensor<T>& mult, const Tensor<T>& add) {
    const Tensor<T>& A = val(a);
    if (!A.same_shape(mult) || !A.same_shape(add)) {
      throw ShapeError("affine_const: shape mismatch");
    }
    Tensor<T> C = A;
    for (std::size_t i = 0; i < C.data.size(); ++i) {
      C.data[i] = mult.data[i] * C.data[i] + add.data[i];
    }
    return push(std::move(C), [a, mult](Tape& t, const Tensor<T>& g) {
      Tensor<T>& dA = t.nodes_[a].grad;
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        dA.data[i] += mult.data[i] * g.data[i];
      }
    });
  }

  Ref sum(Ref a) {
    const Tensor<T>& A = val(a);
    Tensor<T> C(1, 1);
    for (T x : A.data) C.at(0, 0) += x;
    return push(std::move(C), [a](Tape& t, const Tensor<T>& g) {
      Tensor<T>& dA = t.nodes_[a].grad;
      for (T& x : dA.data) x += g.at(0, 0);
    });
  }

  // Mean over elements of (x - target)^2, as a scalar node.
  Ref mean_sq_error(Ref a, const Tensor<T>& target) {
    const Tensor<T>& A = val(a);
    if (!A.same_shape(target)) throw ShapeError("mean_sq_error: shape mismatch");
    Tensor<T> C(1, 1);
    const T n = static_cast<T>(A.data.size());
    for (std::size_t i = 0; i < A.data.size(); ++i) {
      const T d = A.data[i] - target.data[i];
      C.at(0, 0) += d * d / n;
    }
    return push(std::move(C), [a, target](Tape& t, const Tensor<T>& g) {
      Tensor<T>& dA = t.nodes_[a].grad;
      const T n = static_cast<T>(dA.data.size());
      for (std::size_t i = 0; i < dA.data.size(); ++i) {
        dA.data[i] +=
            g.at(0, 0) * T(2) * (t.val(a).data[i] - target.data[i]) / n;
      }
    });
  }

  // Seed the scalar loss with `seed_grad` and accumulate into every node.
  void backward(Ref loss, T seed_grad = T(1)) {
    const Tensor<T>& L = val(loss);
    if (L.rows != 1 || L.cols != 1) {
      throw std::invalid_argument("backward: loss must be scalar");
    }
    for (Node& n : nodes_) n.grad.fill(T(0));
    nodes_[loss].grad.at(0, 0) = seed_grad;
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      if (nodes_[i].backward) nodes_[i].backward(*this, nodes_[i].grad);
    }
  }

 private:
  using BackwardFn = std::function<void(Tape&, const Tensor<T>&)>;

  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    BackwardFn backward;
  };

  const Tensor<T>& val(Ref r) const { return nodes_[r].value; }

  Ref push(Tensor<T> value, BackwardFn fn) {
    Node n;
    n.grad = Tensor<T>(value.rows, value.cols);
    n.value = std::move(value);
    n.backward = std::move(fn);
    nodes_.push_back(std::move(n));
    return static_cast<Ref>(nodes_.size()) - 1;
  }

  static void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
    for (std::size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
  }

  static void gemm(const Tensor<T>& A, const Tensor<T>& B, Tensor<T>& C) {
    // ikj order keeps the inner loop contiguous in B and C.
    for (int i = 0; i < A.rows; ++i) {
      for (int k = 0; k < A.cols; ++k) {
        const T aik = A.at(i, k);
        if (aik == T(0)) continue;
        for (int j = 0; j < B.cols; ++j) C.at(i, j) += aik * B.at(k, j);
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace parest
