#include "attrep/gradcheck.hpp"

#include <cmath>

#include "attrep/contrastive.hpp"
#include "attrep/losses.hpp"
#include "attrep/model.hpp"
#include "attrep/rng.hpp"
#include "attrep/teacher.hpp"
#include "attrep/train.hpp"

namespace attrep {

Eigen::VectorXd finite_difference_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double hi = f(probe);
    probe[i] = x[i] - step;
    const double lo = f(probe);
    probe[i] = x[i];
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

double gradient_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  const double scale = std::max({1.0, analytic.cwiseAbs().maxCoeff(), numeric.cwiseAbs().maxCoeff()});
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

namespace {

Vec random_logits(Rng& rng, int classes) {
  Vec z(classes);
  for (int c = 0; c < classes; ++c) z[c] = rng.normal(0.0, 1.5);
  return z;
}

Vec random_soft_label(Rng& rng, int classes) {
  Vec q(classes);
  for (int c = 0; c < classes; ++c) q[c] = -std::log(std::max(rng.uniform(), 1e-12));
  return q / q.sum();
}

void run_case(GradCheckReport& report, double tolerance, const Eigen::VectorXd& analytic,
              const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x) {
  const Eigen::VectorXd fd = finite_difference_gradient(f, x);
  const double err = gradient_relative_error(analytic, fd);
  report.worst_error = std::max(report.worst_error, err);
  ++report.cases;
  if (!(err < tolerance)) ++report.failures;
}

}  // namespace

GradCheckReport check_loss_gradients(int cases_per_op, double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  GradCheckReport report;
  const int class_counts[] = {2, 5, 10};

  for (int classes : class_counts) {
    for (int i = 0; i < cases_per_op; ++i) {
      const Vec q = random_soft_label(rng, classes);
      const Vec z = random_logits(rng, classes);
      const Vec r = softmax(random_logits(rng, classes));
      const Vec p = softmax(z);
      const double rce_floor = -4.0;
      const double alpha = 0.01;

      run_case(report, tolerance, cross_entropy_grad_logits(q, p),
               [&](const Vec& zz) { return cross_entropy(q, softmax(zz)); }, z);
      run_case(report, tolerance, reverse_cross_entropy_grad_logits(q, p, rce_floor),
               [&](const Vec& zz) { return reverse_cross_entropy(q, softmax(zz), rce_floor); }, z);
      run_case(report, tolerance, symmetric_cross_entropy_grad_logits(q, p, alpha, rce_floor),
               [&](const Vec& zz) { return symmetric_cross_entropy(q, softmax(zz), alpha, rce_floor); },
               z);
      run_case(report, tolerance, kl_divergence_grad_logits(p, r),
               [&](const Vec& zz) { return kl_divergence(softmax(zz), r); }, z);
      run_case(report, tolerance, js_divergence_grad_logits(p, r),
               [&](const Vec& zz) { return js_divergence(softmax(zz), r); }, z);
      run_case(report, tolerance, mean_teacher_loss_grad_logits(p, r),
               [&](const Vec& zz) { return mean_teacher_loss(softmax(zz), r); }, z);
    }
  }

  // Contrastive regularization: gradient w.r.t. the stacked logits of a
  // two-view batch, positives from delta-thresholded soft labels.
  for (int i = 0; i < cases_per_op; ++i) {
    const int n = 3 + i % 3;  // samples; 2N views
    const int classes = class_counts[i % 3];
    const double tau = 0.1;
    const double delta = 0.05;
    const bool normalize = i % 2 == 0;
    std::vector<Vec> labels;
    for (int s = 0; s < n; ++s) labels.push_back(random_soft_label(rng, classes));
    labels.insert(labels.end(), labels.begin(), labels.end());
    const PositiveSets sets = build_positive_sets(labels, delta);

    Eigen::VectorXd flat(2 * n * classes);
    for (int v = 0; v < 2 * n; ++v) flat.segment(v * classes, classes) = random_logits(rng, classes);

    auto unpack = [&](const Eigen::VectorXd& zz) {
      std::vector<Vec> probs;
      probs.reserve(static_cast<std::size_t>(2 * n));
      for (int v = 0; v < 2 * n; ++v) probs.push_back(softmax(zz.segment(v * classes, classes)));
      return probs;
    };
    const std::vector<Vec> grads =
        contrastive_regularization_grad_logits(unpack(flat), sets, tau, normalize);
    Eigen::VectorXd analytic(flat.size());
    for (int v = 0; v < 2 * n; ++v) analytic.segment(v * classes, classes) = grads[static_cast<std::size_t>(v)];
    run_case(report, tolerance, analytic,
             [&](const Eigen::VectorXd& zz) {
               return contrastive_regularization(unpack(zz), sets, tau, normalize);
             },
             flat);
  }

  return report;
}

GradCheckReport check_end_to_end_gradient(int cases, double tolerance, std::uint64_t seed) {
  Rng rng(seed);
  GradCheckReport report;

  ModelSpec spec;
  spec.stage_widths = {8, 8};
  spec.blocks_per_stage = 1;
  spec.aux_stage = 1;
  spec.dropout_prob = 0.0;  // finite differences need a deterministic forward
  spec.num_classes = 3;
  spec.in_channels = 3;
  spec.norm_groups = 4;
  const Network net(spec);

  LossConfig cfg;
  cfg.alpha = 0.01;
  cfg.beta = 1.0;
  cfg.gamma = 1.0;
  cfg.delta = 0.05;
  cfg.tau = 0.1;
  cfg.aux_weight = 0.3;
  TrainOptions opts;

  for (int i = 0; i < cases; ++i) {
    const int n = 2;  // two samples, four views
    std::vector<Image> views;
    for (int v = 0; v < 2 * n; ++v) {
      Image img(3, 4, 4);
      for (Eigen::Index k = 0; k < img.data.size(); ++k) img.data[k] = rng.normal(0.0, 1.0);
      views.push_back(std::move(img));
    }
    std::vector<Vec> labels;
    for (int s = 0; s < n; ++s) {
      Vec one_hot = Vec::Zero(3);
      one_hot[rng.uniform_int(3)] = 1.0;
      labels.push_back(label_smoothing(one_hot, 0.1, 3));
    }

    Eigen::VectorXd params = net.init_params(rng);
    Eigen::VectorXd teacher_params = net.init_params(rng);
    const BatchOutput teacher_out = net.forward(teacher_params, views, false);

    auto loss_at = [&](const Eigen::VectorXd& p) {
      const BatchOutput out = net.forward(p, views, false);
      return total_loss(out, &teacher_out, labels, cfg, opts).breakdown.total;
    };

    Network::Tape tape;
    const BatchOutput out = net.forward(params, views, false, nullptr, &tape);
    const TotalLossResult tl = total_loss(out, &teacher_out, labels, cfg, opts);
    Eigen::VectorXd analytic = Eigen::VectorXd::Zero(params.size());
    net.backward(params, tape, tl.dlogits, tl.daux_logits, tl.dproj, analytic);

    run_case(report, tolerance, analytic, loss_at, params);
  }
  return report;
}

}  // namespace attrep
