#pragma once

#include <Eigen/Dense>
#include <functional>

namespace attrep {

// Central finite differences, dL/dx_i ~ (f(x+h e_i) - f(x-h e_i)) / 2h.
Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double step = 1e-5);

// Robust relative error between an analytic and a finite-difference gradient:
// max_i |a_i - b_i| / max(1, ||a||_inf, ||b||_inf).
double gradient_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

struct GradCheckReport {
  int cases = 0;
  int failures = 0;
  double worst_error = 0.0;
  bool ok() const { return failures == 0; }
};

// Runs the finite-difference suite over every loss primitive (CE, RCE, SCE,
// KL, JS, CR, MT) on random (label, logits) pairs, C in {2, 5, 10}.
GradCheckReport check_loss_gradients(int cases_per_op, double tolerance, std::uint64_t seed);

// End-to-end check of d(total loss)/d(params) on a tiny two-stage network.
GradCheckReport check_end_to_end_gradient(int cases, double tolerance, std::uint64_t seed);

}  // namespace attrep
