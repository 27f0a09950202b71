#include <doctest.h>

#include <cmath>

#include "attrep/contrastive.hpp"
#include "attrep/gradcheck.hpp"
#include "attrep/rng.hpp"

using namespace attrep;

namespace {

Vec random_prob(Rng& rng, int classes) {
  Vec z(classes);
  for (int c = 0; c < classes; ++c) z[c] = rng.normal(0.0, 1.5);
  return softmax(z);
}

Vec one_hot(int classes, int index) {
  Vec v = Vec::Zero(classes);
  v[index] = 1.0;
  return v;
}

// Two-view batches here follow the production layout: first all a-views,
// then all b-views, pairs carrying identical labels.
std::vector<Vec> duplicate_views(const std::vector<Vec>& labels) {
  std::vector<Vec> out = labels;
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

// Independent O((2N)^2) reference, written against the displayed formula with
// no log-sum-exp or matrix tricks.
double cr_bruteforce(const std::vector<Vec>& inputs, const std::vector<Vec>& labels, double delta,
                     double tau, bool normalize) {
  const int n = static_cast<int>(inputs.size());
  std::vector<Vec> u(inputs.begin(), inputs.end());
  if (normalize)
    for (auto& v : u) v /= v.norm();
  double total = 0.0;
  int active = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> positives;
    for (int k = 0; k < n; ++k)
      if (k != i && js_divergence(labels[static_cast<std::size_t>(k)],
                                  labels[static_cast<std::size_t>(i)]) <= delta)
        positives.push_back(k);
    if (positives.empty()) continue;
    double denom = 0.0;
    for (int a = 0; a < n; ++a)
      if (a != i)
        denom += std::exp(u[static_cast<std::size_t>(i)].dot(u[static_cast<std::size_t>(a)]) / tau);
    double anchor = 0.0;
    for (int k : positives)
      anchor += std::log(
          std::exp(u[static_cast<std::size_t>(i)].dot(u[static_cast<std::size_t>(k)]) / tau) / denom);
    total += -anchor / static_cast<double>(positives.size());
    ++active;
  }
  return total / static_cast<double>(active);
}

// Independent InfoNCE with cross-view positives only.
double infonce_bruteforce(const std::vector<Vec>& inputs, double tau, bool normalize) {
  const int n = static_cast<int>(inputs.size());
  const int half = n / 2;
  std::vector<Vec> u(inputs.begin(), inputs.end());
  if (normalize)
    for (auto& v : u) v /= v.norm();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const int partner = (i + half) % n;
    double denom = 0.0;
    for (int a = 0; a < n; ++a)
      if (a != i)
        denom += std::exp(u[static_cast<std::size_t>(i)].dot(u[static_cast<std::size_t>(a)]) / tau);
    total += -std::log(
        std::exp(u[static_cast<std::size_t>(i)].dot(u[static_cast<std::size_t>(partner)]) / tau) /
        denom);
  }
  return total / n;
}

}  // namespace

TEST_CASE("pairwise_js: symmetric with zero diagonal") {
  Rng rng(3);
  std::vector<Vec> labels;
  for (int i = 0; i < 6; ++i) labels.push_back(random_prob(rng, 5));
  const Eigen::MatrixXd js = pairwise_js(labels);
  CHECK((js - js.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(js.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_positive_sets: delta 0 keeps exactly the cross-view partner") {
  Rng rng(5);
  const int n = 5;
  std::vector<Vec> labels;
  for (int i = 0; i < n; ++i) labels.push_back(random_prob(rng, 8));
  const std::vector<Vec> views = duplicate_views(labels);
  const PositiveSets sets = build_positive_sets(views, 0.0);
  for (int i = 0; i < 2 * n; ++i) {
    REQUIRE(sets.members[static_cast<std::size_t>(i)].size() == 1);
    CHECK(sets.members[static_cast<std::size_t>(i)][0] == (i + n) % (2 * n));
    CHECK(sets.skipped[static_cast<std::size_t>(i)] == 0);
  }
}

TEST_CASE("build_positive_sets: shared one-hot labels merge into one positive set") {
  // two samples with the same one-hot label -> all four views are mutual
  // positives at delta = 0.005
  std::vector<Vec> labels{one_hot(4, 2), one_hot(4, 2)};
  const PositiveSets sets = build_positive_sets(duplicate_views(labels), 0.005);
  for (int i = 0; i < 4; ++i) CHECK(sets.members[static_cast<std::size_t>(i)].size() == 3);
}

TEST_CASE("build_positive_sets: delta ln 2 includes everyone") {
  Rng rng(9);
  std::vector<Vec> labels;
  for (int i = 0; i < 4; ++i) labels.push_back(random_prob(rng, 3));
  const std::vector<Vec> views = duplicate_views(labels);
  const PositiveSets sets = build_positive_sets(views, kLn2);
  for (const auto& k : sets.members) CHECK(static_cast<int>(k.size()) == 2 * 4 - 1);
}

TEST_CASE("build_positive_sets: errors and skip flags") {
  CHECK_THROWS_AS(build_positive_sets(std::vector<Vec>{}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_positive_sets(Eigen::MatrixXd::Zero(2, 2), -0.1), std::invalid_argument);
  // distinct one-hots with no partner views: every anchor empty, flagged
  std::vector<Vec> labels{one_hot(3, 0), one_hot(3, 1), one_hot(3, 2)};
  const PositiveSets sets = build_positive_sets(labels, 0.0);
  CHECK(sets.skipped_count() == 3);
}

TEST_CASE("build_positive_sets: monotone in delta") {
  Rng rng(31);
  std::vector<Vec> labels;
  for (int i = 0; i < 8; ++i) labels.push_back(random_prob(rng, 4));
  const std::vector<Vec> views = duplicate_views(labels);
  const Eigen::MatrixXd js = pairwise_js(views);
  double d1 = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const double d2 = d1 + rng.uniform(0.0, 0.2);
    const PositiveSets a = build_positive_sets(js, std::min(d1, kLn2));
    const PositiveSets b = build_positive_sets(js, std::min(d2, kLn2));
    for (std::size_t i = 0; i < a.members.size(); ++i) {
      for (int k : a.members[i]) {
        const auto& bk = b.members[i];
        CHECK(std::find(bk.begin(), bk.end(), k) != bk.end());
      }
    }
    d1 = d2;
  }
}

TEST_CASE("contrastive_regularization: single pair is exactly zero") {
  Rng rng(41);
  std::vector<Vec> labels{random_prob(rng, 5)};
  const std::vector<Vec> views_labels = duplicate_views(labels);
  std::vector<Vec> probs{random_prob(rng, 5), random_prob(rng, 5)};
  const PositiveSets sets = build_positive_sets(views_labels, 0.0);
  CHECK(contrastive_regularization(probs, sets, 0.1, true) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(info_nce_reference(probs, 0.1, true) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("contrastive_regularization: delta 0 degenerates to InfoNCE") {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + rng.uniform_int(7);
    const int classes = 3 + rng.uniform_int(6);
    std::vector<Vec> labels;
    for (int i = 0; i < n; ++i) labels.push_back(random_prob(rng, classes));
    std::vector<Vec> probs;
    for (int i = 0; i < 2 * n; ++i) probs.push_back(random_prob(rng, classes));
    const bool normalize = trial % 2 == 0;
    const PositiveSets sets = build_positive_sets(duplicate_views(labels), 0.0);
    const double cr = contrastive_regularization(probs, sets, 0.1, normalize);
    const double nce = info_nce_reference(probs, 0.1, normalize);
    CHECK(cr == doctest::Approx(nce).epsilon(1e-10));
    CHECK(nce == doctest::Approx(infonce_bruteforce(probs, 0.1, normalize)).epsilon(1e-10));
  }
}

TEST_CASE("contrastive_regularization: brute-force equivalence up to 2N = 32") {
  Rng rng(47);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + rng.uniform_int(16);  // 2N <= 32
    const int classes = 2 + rng.uniform_int(8);
    const double delta = rng.uniform(0.0, 0.3);
    const double tau = rng.uniform(0.05, 0.5);
    const bool normalize = trial % 2 == 0;
    std::vector<Vec> labels;
    for (int i = 0; i < n; ++i) labels.push_back(random_prob(rng, classes));
    const std::vector<Vec> view_labels = duplicate_views(labels);
    std::vector<Vec> probs;
    for (int i = 0; i < 2 * n; ++i) probs.push_back(random_prob(rng, classes));

    const PositiveSets sets = build_positive_sets(view_labels, delta);
    const double fast = contrastive_regularization(probs, sets, tau, normalize);
    const double slow = cr_bruteforce(probs, view_labels, delta, tau, normalize);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-10));
  }
}

TEST_CASE("contrastive_regularization: permutation equivariance") {
  Rng rng(53);
  const int views = 10;
  std::vector<Vec> labels;
  for (int i = 0; i < views / 2; ++i) labels.push_back(random_prob(rng, 6));
  std::vector<Vec> view_labels = duplicate_views(labels);
  std::vector<Vec> probs;
  for (int i = 0; i < views; ++i) probs.push_back(random_prob(rng, 6));

  const PositiveSets sets = build_positive_sets(view_labels, 0.1);
  const double base = contrastive_regularization(probs, sets, 0.1, true);

  const std::vector<int> perm = rng.permutation(views);
  std::vector<Vec> probs_p(probs.size()), labels_p(view_labels.size());
  for (int i = 0; i < views; ++i) {
    probs_p[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = probs[static_cast<std::size_t>(i)];
    labels_p[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = view_labels[static_cast<std::size_t>(i)];
  }
  const PositiveSets sets_p = build_positive_sets(labels_p, 0.1);
  // sets permute consistently
  for (int i = 0; i < views; ++i) {
    const auto& orig = sets.members[static_cast<std::size_t>(i)];
    const auto& perm_set = sets_p.members[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    REQUIRE(orig.size() == perm_set.size());
    for (int k : orig)
      CHECK(std::find(perm_set.begin(), perm_set.end(), perm[static_cast<std::size_t>(k)]) !=
            perm_set.end());
  }
  CHECK(contrastive_regularization(probs_p, sets_p, 0.1, true) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("contrastive_regularization: raising a non-positive similarity never lowers the loss") {
  Rng rng(59);
  const int views = 8;
  std::vector<Vec> labels;
  for (int i = 0; i < views / 2; ++i) labels.push_back(random_prob(rng, 5));
  const PositiveSets sets = build_positive_sets(duplicate_views(labels), 0.0);
  Eigen::MatrixXd sim(views, views);
  for (int i = 0; i < views; ++i)
    for (int k = 0; k < views; ++k) sim(i, k) = rng.normal(0.0, 1.0);
  sim = 0.5 * (sim + sim.transpose());
  const double base = cr_from_similarity(sim, sets);
  for (int trial = 0; trial < 20; ++trial) {
    const int i = rng.uniform_int(views);
    int k = rng.uniform_int(views);
    const auto& ki = sets.members[static_cast<std::size_t>(i)];
    if (k == i || std::find(ki.begin(), ki.end(), k) != ki.end()) continue;
    Eigen::MatrixXd bumped = sim;
    bumped(i, k) += rng.uniform(0.0, 2.0);
    CHECK(cr_from_similarity(bumped, sets) >= base - 1e-12);
  }
}

TEST_CASE("contrastive_regularization: finite-difference gradient through softmax") {
  Rng rng(61);
  const int n = 4, classes = 5;
  const double tau = 0.1, delta = 0.05;
  std::vector<Vec> labels;
  for (int i = 0; i < n; ++i) labels.push_back(random_prob(rng, classes));
  const std::vector<Vec> view_labels = duplicate_views(labels);
  const PositiveSets sets = build_positive_sets(view_labels, delta);

  for (bool normalize : {true, false}) {
    Eigen::VectorXd flat(2 * n * classes);
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = rng.normal(0.0, 1.0);
    auto unpack = [&](const Eigen::VectorXd& z) {
      std::vector<Vec> probs;
      for (int v = 0; v < 2 * n; ++v) probs.push_back(softmax(z.segment(v * classes, classes)));
      return probs;
    };
    const std::vector<Vec> grads =
        contrastive_regularization_grad_logits(unpack(flat), sets, tau, normalize);
    Eigen::VectorXd analytic(flat.size());
    for (int v = 0; v < 2 * n; ++v)
      analytic.segment(v * classes, classes) = grads[static_cast<std::size_t>(v)];
    const Eigen::VectorXd fd = finite_difference_gradient(
        [&](const Eigen::VectorXd& z) {
          return contrastive_regularization(unpack(z), sets, tau, normalize);
        },
        flat);
    CHECK(gradient_relative_error(analytic, fd) < 1e-4);
  }
}

TEST_CASE("contrastive_regularization: tau validation") {
  Rng rng(67);
  std::vector<Vec> probs{random_prob(rng, 3), random_prob(rng, 3)};
  PositiveSets sets;
  sets.members = {{1}, {0}};
  sets.skipped = {0, 0};
  CHECK_THROWS_AS(contrastive_regularization(probs, sets, 0.0, true), std::invalid_argument);
  CHECK_THROWS_AS(info_nce_reference(probs, -1.0, true), std::invalid_argument);
}
