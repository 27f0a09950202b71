#pragma once

#include <Eigen/Dense>

#include "attrep/losses.hpp"

namespace attrep {

// EMA (Mean Teacher) copy of the student parameters:
//   theta' <- eta * theta' + (1 - eta) * theta, applied once after each
// optimizer step. Initialized equal to the student.
struct TeacherState {
  Eigen::VectorXd params;
  double eta = 0.999;
  long step_count = 0;
};

TeacherState make_teacher(const Eigen::VectorXd& student_params, double eta);

// In-place EMA update; the student is untouched. Throws on shape mismatch.
// eta == 1 freezes the teacher at initialization (warned once on stderr).
void ema_update(TeacherState& teacher, const Eigen::VectorXd& student_params);

// Consistency loss KL(student || teacher) for one prediction pair. The
// teacher side is a constant: no gradient flows into it.
double mean_teacher_loss(const Vec& student_probs, const Vec& teacher_probs);

// Gradient w.r.t. the student logits only.
Vec mean_teacher_loss_grad_logits(const Vec& student_probs, const Vec& teacher_probs);

}  // namespace attrep
