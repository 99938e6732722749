#include "dgpinn/errors.hpp"
#include "dgpinn/optimizers.hpp"

namespace dgpinn {

Adam::Adam(Index size, AdamConfig config)
    : config_(config), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {
  if (!(config_.learning_rate > 0.0)) throw ConfigError("Adam learning rate must be positive");
  if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0 && config_.beta2 >= 0.0 &&
        config_.beta2 < 1.0)) {
    throw ConfigError("Adam decay rates must lie in [0, 1)");
  }
}

void Adam::step(Vector& theta, const Vector& grad) {
  if (theta.size() != m_.size() || grad.size() != m_.size()) {
    throw ContractError("Adam: expected " + std::to_string(m_.size()) + " parameters");
  }
  if (!grad.allFinite()) {
    throw NumericalError("Adam: non-finite gradient at step " + std::to_string(steps_ + 1));
  }
  ++steps_;
  beta1_power_ *= config_.beta1;
  beta2_power_ *= config_.beta2;
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - beta1_power_;
  const double c2 = 1.0 - beta2_power_;
  theta.array() -= config_.learning_rate * (m_.array() / c1) /
                   ((v_.array() / c2).sqrt() + config_.epsilon);
}

}  // namespace dgpinn
