#include <doctest.h>

#include "attrep/augment.hpp"
#include "attrep/contrastive.hpp"

using namespace attrep;

namespace {

AugPolicy identity_policy() {
  AugPolicy p;
  p.flip_prob = 0.0;
  p.crop_padding = 0;
  p.erase_prob = 0.0;
  p.norm_mean = {0.0, 0.0, 0.0};
  p.norm_std = {1.0, 1.0, 1.0};
  return p;
}

Image ramp_image(int c, int h, int w) {
  Image img(c, h, w);
  for (Eigen::Index i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<double>(i) / 100.0;
  return img;
}

Vec one_hot(int classes, int index) {
  Vec v = Vec::Zero(classes);
  v[index] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("sample_view: identity policy is the identity transform") {
  Rng rng(1);
  const Image img = ramp_image(3, 8, 8);
  const Image out = sample_view(img, rng, identity_policy());
  CHECK((out.data - img.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_view: deterministic under a copied rng state") {
  AugPolicy policy;  // all augmentations active
  const Image img = ramp_image(3, 16, 16);
  Rng a(99);
  Rng b = a;
  const Image va = sample_view(img, a, policy);
  const Image vb = sample_view(img, b, policy);
  CHECK((va.data - vb.data).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample_view: flipping twice restores the image") {
  AugPolicy policy = identity_policy();
  policy.flip_prob = 1.0;
  Rng rng(5);
  const Image img = ramp_image(3, 6, 6);
  const Image once = sample_view(img, rng, policy);
  const Image twice = sample_view(once, rng, policy);
  CHECK((twice.data - img.data).cwiseAbs().maxCoeff() == 0.0);
  CHECK((once.data - img.data).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("mixup_batch: lambda 1 is the identity") {
  std::vector<Image> images{ramp_image(3, 4, 4), ramp_image(3, 4, 4)};
  images[1].data.setConstant(0.7);
  std::vector<Vec> labels{one_hot(3, 0), one_hot(3, 1)};
  const std::vector<Image> before = images;
  mixup_batch(images, labels, 1.0, {1, 0});
  CHECK((images[0].data - before[0].data).cwiseAbs().maxCoeff() == 0.0);
  CHECK(labels[0][0] == 1.0);
}

TEST_CASE("mixup_batch: midpoint of two one-hots") {
  std::vector<Image> images{ramp_image(3, 4, 4), ramp_image(3, 4, 4)};
  std::vector<Vec> labels{one_hot(4, 1), one_hot(4, 3)};
  mixup_batch(images, labels, 0.5, {1, 0});
  CHECK(labels[0][1] == doctest::Approx(0.5));
  CHECK(labels[0][3] == doctest::Approx(0.5));
  CHECK(is_simplex(labels[0], 1e-9));
  CHECK_THROWS_AS(mixup_batch(images, labels, 1.5, {1, 0}), std::invalid_argument);
}

TEST_CASE("cutmix_batch: degenerate boxes") {
  // zero-area box: identity
  {
    std::vector<Image> images{ramp_image(1, 4, 4), ramp_image(1, 4, 4)};
    images[1].data.setConstant(9.0);
    std::vector<Vec> labels{one_hot(2, 0), one_hot(2, 1)};
    const double lam = cutmix_batch(images, labels, 0, 0, 0, 0, {1, 0});
    CHECK(lam == 1.0);
    CHECK(labels[0][0] == 1.0);
  }
  // full-image box: complete swap
  {
    std::vector<Image> images{ramp_image(1, 4, 4), ramp_image(1, 4, 4)};
    images[1].data.setConstant(9.0);
    std::vector<Vec> labels{one_hot(2, 0), one_hot(2, 1)};
    const double lam = cutmix_batch(images, labels, 0, 0, 4, 4, {1, 0});
    CHECK(lam == 0.0);
    CHECK(images[0].data.minCoeff() == 9.0);
    CHECK(labels[0][1] == 1.0);
  }
}

TEST_CASE("cutmix_batch: label weight equals the realized pixel-area ratio") {
  // 32x32 image, 16x16 box: lambda_eff = 0.75, confirmed by pixel counting
  std::vector<Image> images{Image(1, 32, 32), Image(1, 32, 32)};
  images[0].data.setConstant(1.0);
  images[1].data.setConstant(2.0);
  std::vector<Vec> labels{one_hot(2, 0), one_hot(2, 1)};
  const double lam = cutmix_batch(images, labels, 5, 7, 16, 16, {1, 0});
  CHECK(lam == doctest::Approx(0.75).epsilon(1e-15));

  int replaced = 0;
  for (Eigen::Index i = 0; i < images[0].data.size(); ++i)
    if (images[0].data[i] == 2.0) ++replaced;
  const double ratio = 1.0 - static_cast<double>(replaced) / 1024.0;
  CHECK(lam == doctest::Approx(ratio).epsilon(1e-15));
  CHECK(labels[0][0] == doctest::Approx(0.75));
  CHECK(labels[0][1] == doctest::Approx(0.25));

  CHECK_THROWS_AS(cutmix_batch(images, labels, 20, 20, 16, 16, {1, 0}), std::invalid_argument);
}

TEST_CASE("draw_cutmix_box: realized area tracks 1 - lambda before clamping") {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double lambda = rng.uniform(0.0, 1.0);
    const MixRecord rec = draw_cutmix_box(32, 32, lambda, rng);
    CHECK(rec.box_y0 >= 0);
    CHECK(rec.box_x0 >= 0);
    CHECK(rec.box_y0 + rec.box_h <= 32);
    CHECK(rec.box_x0 + rec.box_w <= 32);
    // clamping can only shrink the box
    const double max_area = (1.0 - lambda) * 1024.0;
    CHECK(static_cast<double>(rec.box_h) * rec.box_w <= max_area + 32 * 2 + 1);
  }
}

TEST_CASE("make_two_view_batch: mixing disabled leaves smoothed one-hots") {
  Rng rng(21);
  TwoViewConfig cfg;
  cfg.policy = identity_policy();
  cfg.num_classes = 4;
  cfg.epsilon_smooth = 0.1;
  cfg.mix_prob = 0.0;
  std::vector<std::pair<Image, int>> samples;
  samples.emplace_back(ramp_image(3, 8, 8), 2);
  samples.emplace_back(ramp_image(3, 8, 8), 0);
  const TwoViewBatch batch = make_two_view_batch(samples, rng, cfg);
  CHECK(batch.size() == 2);
  CHECK(batch.mix.kind == MixRecord::Kind::none);
  CHECK(batch.mixed_labels[0][2] == doctest::Approx(0.925));
  CHECK(batch.mixed_labels[1][0] == doctest::Approx(0.925));
}

TEST_CASE("make_two_view_batch: labels stay on the simplex and views share them") {
  Rng rng(23);
  TwoViewConfig cfg;
  cfg.num_classes = 5;
  std::vector<std::pair<Image, int>> samples;
  for (int i = 0; i < 6; ++i) samples.emplace_back(ramp_image(3, 16, 16), i % 5);
  for (int trial = 0; trial < 25; ++trial) {
    const TwoViewBatch batch = make_two_view_batch(samples, rng, cfg);
    for (const auto& label : batch.mixed_labels) {
      CHECK(is_simplex(label, 1e-6));
      CHECK(label.minCoeff() >= cfg.epsilon_smooth / cfg.num_classes - 1e-12);
    }
    // identical mixing: the cross-view pair shares one label, so JS is 0 and
    // positive sets can never be empty at any delta >= 0
    std::vector<Vec> view_labels = batch.mixed_labels;
    view_labels.insert(view_labels.end(), batch.mixed_labels.begin(), batch.mixed_labels.end());
    const PositiveSets sets = build_positive_sets(view_labels, 0.0);
    CHECK(sets.skipped_count() == 0);
    for (int i = 0; i < batch.size(); ++i)
      CHECK(js_divergence(view_labels[static_cast<std::size_t>(i)],
                          view_labels[static_cast<std::size_t>(i + batch.size())]) == 0.0);
  }
}

TEST_CASE("make_two_view_batch: fully reproducible from the rng state") {
  TwoViewConfig cfg;
  cfg.num_classes = 3;
  std::vector<std::pair<Image, int>> samples;
  for (int i = 0; i < 4; ++i) samples.emplace_back(ramp_image(3, 12, 12), i % 3);
  Rng a(77);
  Rng b(77);
  for (int trial = 0; trial < 10; ++trial) {
    const TwoViewBatch ba = make_two_view_batch(samples, a, cfg);
    const TwoViewBatch bb = make_two_view_batch(samples, b, cfg);
    REQUIRE(ba.size() == bb.size());
    CHECK(ba.mix.kind == bb.mix.kind);
    CHECK(ba.mix.lambda == bb.mix.lambda);
    CHECK(ba.mix.lambda_eff == bb.mix.lambda_eff);
    CHECK(ba.mix.perm == bb.mix.perm);
    for (int i = 0; i < ba.size(); ++i) {
      CHECK((ba.views_a[static_cast<std::size_t>(i)].data - bb.views_a[static_cast<std::size_t>(i)].data)
                .cwiseAbs()
                .maxCoeff() == 0.0);
      CHECK((ba.views_b[static_cast<std::size_t>(i)].data - bb.views_b[static_cast<std::size_t>(i)].data)
                .cwiseAbs()
                .maxCoeff() == 0.0);
      CHECK((ba.mixed_labels[static_cast<std::size_t>(i)] - bb.mixed_labels[static_cast<std::size_t>(i)])
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("AugPolicy: validation") {
  AugPolicy p;
  CHECK_NOTHROW(p.validate());
  p.erase_area_lo = 0.5;
  p.erase_area_hi = 0.2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = AugPolicy{};
  p.flip_prob = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
