#include "attrep/teacher.hpp"

#include <iostream>
#include <stdexcept>

namespace attrep {

TeacherState make_teacher(const Eigen::VectorXd& student_params, double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("make_teacher: eta must be in [0, 1]");
  TeacherState t;
  t.params = student_params;
  t.eta = eta;
  t.step_count = 0;
  return t;
}

void ema_update(TeacherState& teacher, const Eigen::VectorXd& student_params) {
  if (teacher.params.size() != student_params.size())
    throw std::invalid_argument("ema_update: parameter shape mismatch");
  if (teacher.eta == 1.0 && teacher.step_count == 0)
    std::cerr << "warning: ema_update with eta = 1 keeps the teacher frozen at initialization\n";
  teacher.params = teacher.eta * teacher.params + (1.0 - teacher.eta) * student_params;
  ++teacher.step_count;
}

double mean_teacher_loss(const Vec& student_probs, const Vec& teacher_probs) {
  return kl_divergence(student_probs, teacher_probs);
}

Vec mean_teacher_loss_grad_logits(const Vec& student_probs, const Vec& teacher_probs) {
  return kl_divergence_grad_logits(student_probs, teacher_probs);
}

}  // namespace attrep
