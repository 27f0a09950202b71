#pragma once

#include <Eigen/Dense>

namespace attrep {

using Vec = Eigen::VectorXd;

// Floor applied to every probability before it enters a log.
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kLn2 = 0.6931471805599453;

// Hyper-parameters of the total training objective
//   L = L_CE + alpha*L_RCE + beta*L_CR + gamma*L_MT (+ aux_weight * aux CE).
struct LossConfig {
  double alpha = 0.01;          // reverse cross entropy weight
  double beta = 1.0;            // contrastive regularization weight
  double gamma = 1.0;           // mean teacher consistency weight
  double delta = 0.005;         // JS threshold for positive pairs
  double tau = 0.1;             // contrastive temperature
  double eta = 0.999;           // teacher EMA decay
  double epsilon_smooth = 0.1;  // label smoothing
  double rce_floor = -4.0;      // stand-in for log 0 inside RCE
  double aux_weight = 0.3;      // auxiliary classifier CE weight
  double fusion_weight = 0.3;   // inference-time head fusion weight

  // Throws std::invalid_argument when any range constraint is violated.
  void validate() const;
};

// True when v is on the probability simplex: entries >= 0, sum within tol of 1.
bool is_simplex(const Vec& v, double tol = 1e-6);

// Numerically stable softmax (max-subtraction). Throws on non-finite logits
// or fewer than two classes.
Vec softmax(const Vec& logits);

// Chain rule through softmax: given probs p = softmax(z) and g = dL/dp,
// returns dL/dz = p .* (g - <g, p>).
Vec softmax_backward(const Vec& probs, const Vec& grad_probs);

// H(q, p) = -sum_c q_c log p_c, p clamped at kProbFloor inside the log.
double cross_entropy(const Vec& q, const Vec& p);
Vec cross_entropy_grad_logits(const Vec& q, const Vec& p);

// H(p, q) = -sum_c p_c A_c with A_c = max(log q_c, rce_floor).
double reverse_cross_entropy(const Vec& q, const Vec& p, double rce_floor);
Vec reverse_cross_entropy_grad_logits(const Vec& q, const Vec& p, double rce_floor);

// cross_entropy + alpha * reverse_cross_entropy.
double symmetric_cross_entropy(const Vec& q, const Vec& p, double alpha, double rce_floor);
Vec symmetric_cross_entropy_grad_logits(const Vec& q, const Vec& p, double alpha,
                                        double rce_floor);

// KL(p || r) = sum_c p_c (log p_c - log r_c), logs clamped at kProbFloor.
// Terms with p_c == 0 contribute exactly zero.
double kl_divergence(const Vec& p, const Vec& r);
// Gradient w.r.t. the logits producing p; r is a constant.
Vec kl_divergence_grad_logits(const Vec& p, const Vec& r);

// 0.5*KL(p||m) + 0.5*KL(r||m) with m = (p + r)/2. Symmetric, in [0, ln 2].
double js_divergence(const Vec& p, const Vec& r);
// Gradient w.r.t. the logits producing p (r constant).
Vec js_divergence_grad_logits(const Vec& p, const Vec& r);

// (1 - epsilon)*q + epsilon/num_classes. Strictly positive when epsilon > 0.
Vec label_smoothing(const Vec& q, double epsilon, int num_classes);

}  // namespace attrep
