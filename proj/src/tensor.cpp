#include "giuda/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace giuda {

bool Tensor::all_finite() const {
  for (double x : data)
    if (!std::isfinite(x)) return false;
  return true;
}

double cosine_lr(std::size_t epoch, const TrainConfig& config) {
  config.validate();
  if (epoch >= config.total_epochs) return config.min_learning_rate;
  const double pi = 3.14159265358979323846;
  const double t = static_cast<double>(epoch) /
                   static_cast<double>(config.total_epochs);
  return config.min_learning_rate +
         0.5 * (config.learning_rate - config.min_learning_rate) *
             (1.0 + std::cos(pi * t));
}

void adam_step(std::vector<Parameter*>& params, const TrainConfig& config,
               double lr_now) {
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;
  for (Parameter* p : params) {
    if (!p->grad.all_finite())
      throw std::runtime_error("adam_step: non-finite gradient in parameter '" +
                               p->name + "'");
    p->step_count += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p->step_count));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p->step_count));
    const double decay = 1.0 - lr_now * config.weight_decay;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->value.data[i] *= decay;
      const double g = p->grad.data[i];
      p->m.data[i] = beta1 * p->m.data[i] + (1.0 - beta1) * g;
      p->v.data[i] = beta2 * p->v.data[i] + (1.0 - beta2) * g * g;
      const double m_hat = p->m.data[i] / bc1;
      const double v_hat = p->v.data[i] / bc2;
      p->value.data[i] -= lr_now * m_hat / (std::sqrt(v_hat) + eps);
    }
    p->zero_grad();
  }
}

}  // namespace giuda
