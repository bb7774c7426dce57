#pragma once

#include <cmath>
#include <limits>
#include <span>

#include <Eigen/Dense>

#include "sga/models.hpp"
#include "sga/random.hpp"

namespace sga::detail {

// One parameter tensor's optimizer state. Weight decay is applied as an L2
// term on the gradient.
class ParameterStepper {
 public:
  ParameterStepper(const TrainConfig& cfg, Eigen::Index rows, Eigen::Index cols)
      : cfg_(cfg), m_(Eigen::MatrixXd::Zero(rows, cols)), v_(Eigen::MatrixXd::Zero(rows, cols)) {}

  void step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad) {
    const Eigen::MatrixXd g = grad + cfg_.weight_decay * param;
    if (cfg_.optimizer == Optimizer::kGradientDescent) {
      param -= cfg_.learning_rate * g;
      return;
    }
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kEps = 1e-8;
    ++t_;
    m_ = kBeta1 * m_ + (1.0 - kBeta1) * g;
    v_ = kBeta2 * v_ + (1.0 - kBeta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    param.array() -= cfg_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + kEps);
  }

 private:
  const TrainConfig& cfg_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd v_;
  int t_ = 0;
};

// Tracks the best validation loss and decides when to stop.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  // Returns true when this epoch improved on the best validation loss.
  bool observe(double validation_loss) {
    if (validation_loss < best_) {
      best_ = validation_loss;
      since_best_ = 0;
      return true;
    }
    ++since_best_;
    return false;
  }
  bool should_stop() const { return patience_ > 0 && since_best_ >= patience_; }

 private:
  int patience_;
  double best_ = std::numeric_limits<double>::infinity();
  int since_best_ = 0;
};

inline Eigen::MatrixXd uniform_init(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(rows));
  Eigen::MatrixXd w(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = (2.0 * uniform_real(rng) - 1.0) * bound;
  }
  return w;
}

// Mean cross-entropy of row-wise softmax probabilities; also turns `probs`
// into dLoss/dLogits in place.
inline double cross_entropy_backward(Eigen::MatrixXd& probs, std::span<const int> labels) {
  double loss = 0.0;
  const auto rows = static_cast<double>(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    loss -= std::log(std::max(probs(i, labels[i]), 1e-300));
    probs(i, labels[i]) -= 1.0;
  }
  probs /= rows;
  return loss / rows;
}

}  // namespace sga::detail
