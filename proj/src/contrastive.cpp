#include "attrep/contrastive.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace attrep {

namespace {

// Rows of the input vectors, optionally L2-normalized.
Eigen::MatrixXd stack_inputs(const std::vector<Vec>& inputs, bool normalize) {
  const int n = static_cast<int>(inputs.size());
  const Eigen::Index dim = inputs[0].size();
  Eigen::MatrixXd u(n, dim);
  for (int i = 0; i < n; ++i) {
    if (inputs[static_cast<std::size_t>(i)].size() != dim)
      throw std::invalid_argument("contrastive: inconsistent vector lengths");
    u.row(i) = inputs[static_cast<std::size_t>(i)].transpose();
    if (normalize) {
      const double norm = u.row(i).norm();
      if (norm <= 0.0) throw std::invalid_argument("contrastive: zero vector cannot be normalized");
      u.row(i) /= norm;
    }
  }
  return u;
}

// Per-anchor log-sum-exp over a != i.
Eigen::VectorXd row_lse_excluding_diag(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows());
  Eigen::VectorXd lse(n);
  for (int i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < n; ++a)
      if (a != i) m = std::max(m, s(i, a));
    double acc = 0.0;
    for (int a = 0; a < n; ++a)
      if (a != i) acc += std::exp(s(i, a) - m);
    lse[i] = m + std::log(acc);
  }
  return lse;
}

}  // namespace

int PositiveSets::skipped_count() const {
  int n = 0;
  for (char s : skipped) n += s ? 1 : 0;
  return n;
}

double PositiveSets::mean_size() const {
  if (members.empty()) return 0.0;
  double total = 0.0;
  for (const auto& k : members) total += static_cast<double>(k.size());
  return total / static_cast<double>(members.size());
}

Eigen::MatrixXd pairwise_js(const std::vector<Vec>& labels) {
  const int n = static_cast<int>(labels.size());
  if (n == 0) throw std::invalid_argument("pairwise_js: empty batch");
  Eigen::MatrixXd js = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      const double d = js_divergence(labels[static_cast<std::size_t>(i)], labels[static_cast<std::size_t>(k)]);
      js(i, k) = d;
      js(k, i) = d;
    }
  }
  return js;
}

PositiveSets build_positive_sets(const std::vector<Vec>& labels, double delta) {
  for (const auto& l : labels) {
    if (!is_simplex(l)) throw std::invalid_argument("build_positive_sets: label off the simplex");
  }
  return build_positive_sets(pairwise_js(labels), delta);
}

PositiveSets build_positive_sets(const Eigen::MatrixXd& js, double delta) {
  const int n = static_cast<int>(js.rows());
  if (n == 0) throw std::invalid_argument("build_positive_sets: empty batch");
  if (delta < 0.0 || delta > kLn2 + 1e-12)
    throw std::invalid_argument("build_positive_sets: delta must be in [0, ln 2]");
  PositiveSets sets;
  sets.members.resize(static_cast<std::size_t>(n));
  sets.skipped.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    auto& ki = sets.members[static_cast<std::size_t>(i)];
    for (int k = 0; k < n; ++k) {
      if (k != i && js(i, k) <= delta) ki.push_back(k);
    }
    if (ki.empty()) sets.skipped[static_cast<std::size_t>(i)] = 1;
  }
  return sets;
}

double cr_from_similarity(const Eigen::MatrixXd& similarity, const PositiveSets& positives) {
  const int n = static_cast<int>(similarity.rows());
  if (positives.size() != n)
    throw std::invalid_argument("contrastive_regularization: positives/input count mismatch");
  const Eigen::VectorXd lse = row_lse_excluding_diag(similarity);
  double total = 0.0;
  int active = 0;
  for (int i = 0; i < n; ++i) {
    const auto& ki = positives.members[static_cast<std::size_t>(i)];
    if (ki.empty()) continue;
    double anchor = 0.0;
    for (int k : ki) anchor += similarity(i, k) - lse[i];
    total += -anchor / static_cast<double>(ki.size());
    ++active;
  }
  return active > 0 ? total / static_cast<double>(active) : 0.0;
}

double contrastive_regularization(const std::vector<Vec>& inputs, const PositiveSets& positives,
                                  double tau, bool normalize) {
  if (tau <= 0.0) throw std::invalid_argument("contrastive_regularization: tau must be > 0");
  if (inputs.empty()) throw std::invalid_argument("contrastive_regularization: empty batch");
  const Eigen::MatrixXd u = stack_inputs(inputs, normalize);
  const Eigen::MatrixXd s = (u * u.transpose()) / tau;
  return cr_from_similarity(s, positives);
}

CrGradResult contrastive_regularization_with_grad(const std::vector<Vec>& inputs,
                                                  const PositiveSets& positives, double tau,
                                                  bool normalize) {
  if (tau <= 0.0) throw std::invalid_argument("contrastive_regularization: tau must be > 0");
  if (inputs.empty()) throw std::invalid_argument("contrastive_regularization: empty batch");
  const int n = static_cast<int>(inputs.size());
  if (positives.size() != n)
    throw std::invalid_argument("contrastive_regularization: positives/input count mismatch");

  const Eigen::MatrixXd u = stack_inputs(inputs, normalize);
  const Eigen::MatrixXd s = (u * u.transpose()) / tau;
  const Eigen::VectorXd lse = row_lse_excluding_diag(s);

  int active = 0;
  for (int i = 0; i < n; ++i)
    if (!positives.members[static_cast<std::size_t>(i)].empty()) ++active;

  CrGradResult result;
  result.grad_inputs.assign(static_cast<std::size_t>(n), Vec::Zero(inputs[0].size()));
  if (active == 0) return result;

  // dL/ds_ik = (P_ik - T_ik) / active for active anchors, with
  // P_ik = exp(s_ik)/sum_{a != i} exp(s_ia) and T the positive-mask
  // distribution. Same softmax-minus-target shape as cross entropy.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  double value = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& ki = positives.members[static_cast<std::size_t>(i)];
    if (ki.empty()) continue;
    for (int a = 0; a < n; ++a)
      if (a != i) w(i, a) = std::exp(s(i, a) - lse[i]);
    double anchor = 0.0;
    const double t = 1.0 / static_cast<double>(ki.size());
    for (int k : ki) {
      anchor += s(i, k) - lse[i];
      w(i, k) -= t;
    }
    value += -anchor / static_cast<double>(ki.size());
  }
  value /= static_cast<double>(active);
  w /= static_cast<double>(active);
  result.value = value;

  // s = u u^T / tau, so dL/du = (W + W^T) u / tau.
  const Eigen::MatrixXd grad_u = (w + w.transpose()) * u / tau;

  for (int i = 0; i < n; ++i) {
    Vec g = grad_u.row(i).transpose();
    if (normalize) {
      // u_i = p_i/||p_i||: project out the radial component and rescale.
      const double norm = inputs[static_cast<std::size_t>(i)].norm();
      const Vec ui = u.row(i).transpose();
      g = (g - g.dot(ui) * ui) / norm;
    }
    result.grad_inputs[static_cast<std::size_t>(i)] = g;
  }
  return result;
}

std::vector<Vec> contrastive_regularization_grad_logits(const std::vector<Vec>& probs,
                                                        const PositiveSets& positives, double tau,
                                                        bool normalize) {
  const CrGradResult r = contrastive_regularization_with_grad(probs, positives, tau, normalize);
  std::vector<Vec> grads(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    grads[i] = softmax_backward(probs[i], r.grad_inputs[i]);
  return grads;
}

double info_nce_reference(const std::vector<Vec>& inputs, double tau, bool normalize) {
  const int n = static_cast<int>(inputs.size());
  if (n == 0 || n % 2 != 0)
    throw std::invalid_argument("info_nce_reference: need an even, nonempty view count");
  PositiveSets cross_view;
  cross_view.members.resize(static_cast<std::size_t>(n));
  cross_view.skipped.assign(static_cast<std::size_t>(n), 0);
  const int half = n / 2;
  for (int i = 0; i < n; ++i)
    cross_view.members[static_cast<std::size_t>(i)].push_back((i + half) % n);
  return contrastive_regularization(inputs, cross_view, tau, normalize);
}

}  // namespace attrep
