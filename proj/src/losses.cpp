#include "attrep/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace attrep {

namespace {

void require_same_length(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": length mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
}

inline double clamped_log(double x) { return std::log(std::max(x, kProbFloor)); }

}  // namespace

void LossConfig::validate() const {
  if (alpha < 0.0) throw std::invalid_argument("LossConfig: alpha must be >= 0");
  if (beta < 0.0) throw std::invalid_argument("LossConfig: beta must be >= 0");
  if (gamma < 0.0) throw std::invalid_argument("LossConfig: gamma must be >= 0");
  if (delta < 0.0 || delta > kLn2) throw std::invalid_argument("LossConfig: delta must be in [0, ln 2]");
  if (tau <= 0.0) throw std::invalid_argument("LossConfig: tau must be > 0");
  if (eta < 0.0 || eta >= 1.0) throw std::invalid_argument("LossConfig: eta must be in [0, 1)");
  if (epsilon_smooth < 0.0 || epsilon_smooth >= 1.0)
    throw std::invalid_argument("LossConfig: epsilon_smooth must be in [0, 1)");
  if (rce_floor >= 0.0) throw std::invalid_argument("LossConfig: rce_floor must be < 0");
  if (aux_weight < 0.0) throw std::invalid_argument("LossConfig: aux_weight must be >= 0");
  if (fusion_weight < 0.0 || fusion_weight > 1.0)
    throw std::invalid_argument("LossConfig: fusion_weight must be in [0, 1]");
}

bool is_simplex(const Vec& v, double tol) {
  if (v.size() == 0) return false;
  if ((v.array() < 0.0).any()) return false;
  return std::abs(v.sum() - 1.0) <= tol;
}

Vec softmax(const Vec& logits) {
  if (logits.size() < 2) throw std::invalid_argument("softmax: need at least two classes");
  if (!logits.allFinite()) throw std::invalid_argument("softmax: non-finite logit");
  const Eigen::ArrayXd shifted = logits.array() - logits.maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  return (e / e.sum()).matrix();
}

Vec softmax_backward(const Vec& probs, const Vec& grad_probs) {
  require_same_length(probs, grad_probs, "softmax_backward");
  const double inner = probs.dot(grad_probs);
  return (probs.array() * (grad_probs.array() - inner)).matrix();
}

double cross_entropy(const Vec& q, const Vec& p) {
  require_same_length(q, p, "cross_entropy");
  double loss = 0.0;
  for (Eigen::Index c = 0; c < q.size(); ++c) {
    if (q[c] != 0.0) loss -= q[c] * clamped_log(p[c]);
  }
  return loss;
}

Vec cross_entropy_grad_logits(const Vec& q, const Vec& p) {
  require_same_length(q, p, "cross_entropy");
  Vec grad_prob(q.size());
  for (Eigen::Index c = 0; c < q.size(); ++c) grad_prob[c] = -q[c] / std::max(p[c], kProbFloor);
  return softmax_backward(p, grad_prob);
}

double reverse_cross_entropy(const Vec& q, const Vec& p, double rce_floor) {
  require_same_length(q, p, "reverse_cross_entropy");
  double loss = 0.0;
  for (Eigen::Index c = 0; c < q.size(); ++c) {
    const double log_q = q[c] > 0.0 ? std::max(std::log(q[c]), rce_floor) : rce_floor;
    loss -= p[c] * log_q;
  }
  return loss;
}

Vec reverse_cross_entropy_grad_logits(const Vec& q, const Vec& p, double rce_floor) {
  require_same_length(q, p, "reverse_cross_entropy");
  Vec grad_prob(q.size());
  for (Eigen::Index c = 0; c < q.size(); ++c) {
    const double log_q = q[c] > 0.0 ? std::max(std::log(q[c]), rce_floor) : rce_floor;
    grad_prob[c] = -log_q;
  }
  return softmax_backward(p, grad_prob);
}

double symmetric_cross_entropy(const Vec& q, const Vec& p, double alpha, double rce_floor) {
  if (alpha < 0.0) throw std::invalid_argument("symmetric_cross_entropy: alpha must be >= 0");
  return cross_entropy(q, p) + alpha * reverse_cross_entropy(q, p, rce_floor);
}

Vec symmetric_cross_entropy_grad_logits(const Vec& q, const Vec& p, double alpha,
                                        double rce_floor) {
  if (alpha < 0.0) throw std::invalid_argument("symmetric_cross_entropy: alpha must be >= 0");
  return cross_entropy_grad_logits(q, p) +
         alpha * reverse_cross_entropy_grad_logits(q, p, rce_floor);
}

double kl_divergence(const Vec& p, const Vec& r) {
  require_same_length(p, r, "kl_divergence");
  double kl = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    if (p[c] != 0.0) kl += p[c] * (clamped_log(p[c]) - clamped_log(r[c]));
  }
  return kl;
}

Vec kl_divergence_grad_logits(const Vec& p, const Vec& r) {
  require_same_length(p, r, "kl_divergence");
  Vec grad_prob(p.size());
  for (Eigen::Index c = 0; c < p.size(); ++c)
    grad_prob[c] = clamped_log(p[c]) - clamped_log(r[c]) + 1.0;
  return softmax_backward(p, grad_prob);
}

double js_divergence(const Vec& p, const Vec& r) {
  require_same_length(p, r, "js_divergence");
  const Vec m = 0.5 * (p + r);
  return 0.5 * kl_divergence(p, m) + 0.5 * kl_divergence(r, m);
}

Vec js_divergence_grad_logits(const Vec& p, const Vec& r) {
  require_same_length(p, r, "js_divergence");
  const Vec m = 0.5 * (p + r);
  Vec grad_prob(p.size());
  for (Eigen::Index c = 0; c < p.size(); ++c)
    grad_prob[c] = 0.5 * (clamped_log(p[c]) - clamped_log(m[c]));
  return softmax_backward(p, grad_prob);
}

Vec label_smoothing(const Vec& q, double epsilon, int num_classes) {
  if (epsilon < 0.0 || epsilon >= 1.0)
    throw std::invalid_argument("label_smoothing: epsilon must be in [0, 1)");
  if (num_classes != q.size())
    throw std::invalid_argument("label_smoothing: num_classes does not match label length");
  return (1.0 - epsilon) * q + Vec::Constant(q.size(), epsilon / num_classes);
}

}  // namespace attrep
