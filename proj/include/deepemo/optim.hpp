#pragma once

// Adam with bias correction:
//   t <- t + 1
//   m <- b1*m + (1-b1)*g        v <- b2*v + (1-b2)*g^2
//   m_hat = m / (1 - b1^t)      v_hat = v / (1 - b2^t)
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
// Moments are kept in the parameter scalar type; the per-element update is
// evaluated in double.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "deepemo/layers.hpp"
#include "deepemo/tensor.hpp"

namespace deepemo {

struct AdamConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename T>
void adam_update(TensorT<T>& param, const TensorT<T>& grad, TensorT<T>& m, TensorT<T>& v,
                 const AdamConfig& cfg, int64_t t) {
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (size_t i = 0; i < param.data.size(); ++i) {
    const double g = grad.data[i];
    const double mi = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g * g;
    m.data[i] = static_cast<T>(mi);
    v.data[i] = static_cast<T>(vi);
    param.data[i] = static_cast<T>(param.data[i] - cfg.lr * (mi / bc1) /
                                                       (std::sqrt(vi / bc2) + cfg.eps));
  }
}

/// Optimizer over a fixed set of parameter references. With
/// `freeze_backbone` only parameters under "fc." are updated; everything
/// else keeps its value (and accrues no moment state).
template <typename T>
class Adam {
 public:
  Adam(std::vector<ParamRef<T>> params, const AdamConfig& cfg, bool freeze_backbone = false)
      : cfg_(cfg) {
    for (auto& p : params) {
      if (freeze_backbone && p.name.rfind("fc.", 0) != 0) continue;
      params_.push_back(p);
      m_.emplace_back(p.value->shape);
      v_.emplace_back(p.value->shape);
    }
  }

  void step() {
    ++t_;
    for (size_t i = 0; i < params_.size(); ++i) {
      adam_update(*params_[i].value, *params_[i].grad, m_[i], v_[i], cfg_, t_);
    }
  }

  int64_t step_count() const { return t_; }
  size_t tracked_parameters() const { return params_.size(); }

 private:
  AdamConfig cfg_;
  std::vector<ParamRef<T>> params_;
  std::vector<TensorT<T>> m_, v_;
  int64_t t_ = 0;
};

}  // namespace deepemo
