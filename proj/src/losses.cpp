#include "fsiam/losses.hpp"

#include <cmath>

#include "fsiam/error.hpp"

namespace fsiam {

namespace {

void require_same_length(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kLengthMismatch, "vectors differ in length");
}

void require_finite(const Eigen::VectorXd& v) {
  if (!v.allFinite()) throw Error(ErrorCode::kInvalidArgument, "inputs must be finite");
}

}  // namespace

void OptimizerSpec::validate() const {
  if (!(learning_rate > 0)) throw Error(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  if (!(beta1 >= 0 && beta1 < 1)) throw Error(ErrorCode::kInvalidArgument, "beta1 must be in [0, 1)");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
}

LossValue cross_entropy(const Eigen::VectorXd& probs, int target) {
  if (probs.size() == 0 || !probs.allFinite() || (probs.array() <= 0).any() ||
      std::abs(probs.sum() - 1.0) > 1e-6)
    throw Error(ErrorCode::kInvalidDistribution, "probabilities must be positive and sum to 1");
  if (target < 0 || target >= probs.size())
    throw Error(ErrorCode::kInvalidArgument, "target index out of range");
  LossValue out;
  out.loss = -std::log(probs[target]);
  out.gradient = Eigen::VectorXd::Zero(probs.size());
  out.gradient[target] = -1.0 / probs[target];
  return out;
}

LossValue smooth_l1(const Eigen::VectorXd& residuals) {
  require_finite(residuals);
  LossValue out;
  out.gradient.resize(residuals.size());
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double d = residuals[i];
    if (std::abs(d) < 1.0) {
      out.loss += 0.5 * d * d;
      out.gradient[i] = d;
    } else {
      out.loss += std::abs(d) - 0.5;
      out.gradient[i] = d > 0 ? 1.0 : -1.0;
    }
  }
  return out;
}

LossValue mse_tracking(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target) {
  require_same_length(predicted, target);
  if (predicted.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty input");
  require_finite(predicted);
  require_finite(target);
  const Eigen::VectorXd diff = predicted - target;
  const double n = static_cast<double>(diff.size());
  return {diff.squaredNorm() / n, 2.0 * diff / n};
}

LossValue l2_completion(const Eigen::VectorXd& predicted, const Eigen::VectorXd& target) {
  require_same_length(predicted, target);
  require_finite(predicted);
  require_finite(target);
  const Eigen::VectorXd diff = predicted - target;
  return {diff.squaredNorm(), 2.0 * diff};
}

double loss_2d(const LossComponents& c, const LossWeights& w) { return w.clf * c.clf + w.reg * c.reg; }

double loss_3d(const LossComponents& c, const LossWeights& w) { return w.tr * c.tr + w.comp * c.comp; }

double total_loss(const LossComponents& c, const LossWeights& w) {
  for (double v : {c.clf, c.reg, c.tr, c.comp})
    if (!std::isfinite(v) || v < 0) throw Error(ErrorCode::kInvalidArgument, "loss components must be finite and >= 0");
  return loss_2d(c, w) + loss_3d(c, w);
}

}  // namespace fsiam
