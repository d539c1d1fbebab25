#pragma once

#include <Eigen/Core>

namespace fsiam {

/// Multi-task weights: total = (clf * L_clf + reg * L_reg) + (tr * L_tr + comp * L_comp).
struct LossWeights {
  double clf = 1.0;
  double reg = 1.2;
  double tr = 1.0;
  double comp = 1e-6;
};

/// Training hyper-parameters. Kept as metadata; nothing here optimizes.
struct OptimizerSpec {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  int batch_size = 32;

  void validate() const;
};

struct LossValue {
  double loss = 0;
  Eigen::VectorXd gradient;  // d loss / d first argument
};

/// -log p[target]. `probs` must be positive and sum to 1 within 1e-6.
LossValue cross_entropy(const Eigen::VectorXd& probs, int target);

/// Sum of 0.5 d^2 for |d| < 1, |d| - 0.5 otherwise.
LossValue smooth_l1(const Eigen::VectorXd& residuals);

/// Mean squared error; gradient with respect to `predicted`.
LossValue mse_tracking(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target);

/// Sum of squared differences; gradient with respect to `predicted`.
LossValue l2_completion(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target);

struct LossComponents {
  double clf = 0;
  double reg = 0;
  double tr = 0;
  double comp = 0;
};

double loss_2d(const LossComponents& c, const LossWeights& w = {});
double loss_3d(const LossComponents& c, const LossWeights& w = {});
double total_loss(const LossComponents& c, const LossWeights& w = {});

}  // namespace fsiam
