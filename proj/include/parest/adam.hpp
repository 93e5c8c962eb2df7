#pragma once

#include <cmath>
#include <vector>

#include "parest/tensor.hpp"

namespace parest {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected adaptive-moment update over a flat parameter list.
template <typename T>
class Adam {
 public:
  Adam(const std::vector<Tensor<T>*>& params, AdamConfig cfg)
      : cfg_(cfg) {
    for (const Tensor<T>* p : params) {
      m_.emplace_back(p->rows, p->cols);
      v_.emplace_back(p->rows, p->cols);
    }
  }

  long step_count() const { return step_; }

  // lr_scale lets the caller apply warmup/decay schedules.
  void step(const std::vector<Tensor<T>*>& params,
            const std::vector<Tensor<T>>& grads, double lr_scale = 1.0) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
      throw ShapeError("adam_step: parameter list mismatch");
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    const double lr = cfg_.lr * lr_scale;
    for (std::size_t p = 0; p < m_.size(); ++p) {
      Tensor<T>& param = *params[p];
      const Tensor<T>& g = grads[p];
      if (!param.same_shape(g)) throw ShapeError("adam_step: grad shape");
      for (std::size_t i = 0; i < param.data.size(); ++i) {
        const double gi = static_cast<double>(g.data[i]);
        double mi = cfg_.beta1 * static_cast<double>(m_[p].data[i]) +
                    (1.0 - cfg_.beta1) * gi;
        double vi = cfg_.beta2 * static_cast<double>(v_[p].data[i]) +
                    (1.0 - cfg_.beta2) * gi * gi;
        m_[p].data[i] = static_cast<T>(mi);
        v_[p].data[i] = static_cast<T>(vi);
        const double mhat = mi / bc1;
        const double vhat = vi / bc2;
        param.data[i] -=
            static_cast<T>(lr * mhat / (std::sqrt(vhat) + cfg_.eps));
      }
    }
  }

  std::vector<Tensor<T>>& first_moments() { return m_; }
  std::vector<Tensor<T>>& second_moments() { return v_; }
  void set_step_count(long s) { step_ = s; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
  long step_ = 0;
};

}  // namespace parest
