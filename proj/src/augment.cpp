#include "attrep/augment.hpp"

#include <cmath>
#include <stdexcept>

namespace attrep {

void AugPolicy::validate() const {
  if (flip_prob < 0.0 || flip_prob > 1.0) throw std::invalid_argument("AugPolicy: flip_prob must be in [0, 1]");
  if (crop_padding < 0) throw std::invalid_argument("AugPolicy: crop_padding must be >= 0");
  if (erase_prob < 0.0 || erase_prob > 1.0) throw std::invalid_argument("AugPolicy: erase_prob must be in [0, 1]");
  if (erase_area_lo <= 0.0 || erase_area_hi >= 1.0 || erase_area_lo > erase_area_hi)
    throw std::invalid_argument("AugPolicy: erase area range must satisfy 0 < lo <= hi < 1");
  for (double s : norm_std)
    if (s <= 0.0) throw std::invalid_argument("AugPolicy: normalization std must be positive");
}

Image sample_view(const Image& image, Rng& rng, const AugPolicy& policy) {
  policy.validate();
  if (image.height < 1 || image.width < 1 || image.channels < 1)
    throw std::invalid_argument("sample_view: empty image");
  if (static_cast<std::size_t>(image.channels) > policy.norm_mean.size())
    throw std::invalid_argument("sample_view: more channels than normalization constants");

  Image out = image;

  // Zero-pad and crop back to the original size.
  if (policy.crop_padding > 0) {
    const int pad = policy.crop_padding;
    const int oy = rng.uniform_int(2 * pad + 1);
    const int ox = rng.uniform_int(2 * pad + 1);
    Image cropped(image.channels, image.height, image.width);
    for (int c = 0; c < image.channels; ++c) {
      for (int y = 0; y < image.height; ++y) {
        const int sy = y + oy - pad;
        if (sy < 0 || sy >= image.height) continue;  // zero border
        for (int x = 0; x < image.width; ++x) {
          const int sx = x + ox - pad;
          if (sx < 0 || sx >= image.width) continue;
          cropped.at(c, y, x) = out.at(c, sy, sx);
        }
      }
    }
    out = std::move(cropped);
  }

  if (policy.flip_prob > 0.0 && rng.uniform() < policy.flip_prob) {
    Image flipped(out.channels, out.height, out.width);
    for (int c = 0; c < out.channels; ++c)
      for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) flipped.at(c, y, x) = out.at(c, y, out.width - 1 - x);
    out = std::move(flipped);
  }

  for (int c = 0; c < out.channels; ++c) {
    const double mean = policy.norm_mean[static_cast<std::size_t>(c)];
    const double inv_std = 1.0 / policy.norm_std[static_cast<std::size_t>(c)];
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) out.at(c, y, x) = (out.at(c, y, x) - mean) * inv_std;
  }

  // Random erasing: square patch, zero fill (the per-channel mean after
  // normalization).
  if (policy.erase_prob > 0.0 && rng.uniform() < policy.erase_prob) {
    const double area_frac = rng.uniform(policy.erase_area_lo, policy.erase_area_hi);
    const int side = std::max(
        1, static_cast<int>(std::lround(std::sqrt(area_frac * out.height * out.width))));
    const int sh = std::min(side, out.height);
    const int sw = std::min(side, out.width);
    const int y0 = rng.uniform_int(out.height - sh + 1);
    const int x0 = rng.uniform_int(out.width - sw + 1);
    for (int c = 0; c < out.channels; ++c)
      for (int y = y0; y < y0 + sh; ++y)
        for (int x = x0; x < x0 + sw; ++x) out.at(c, y, x) = 0.0;
  }

  return out;
}

namespace {

void require_mix_inputs(const std::vector<Image>& images, const std::vector<Vec>& labels,
                        const std::vector<int>& perm) {
  if (images.empty()) throw std::invalid_argument("mix: empty batch");
  if (labels.size() != images.size() || perm.size() != images.size())
    throw std::invalid_argument("mix: images/labels/perm size mismatch");
  for (int p : perm)
    if (p < 0 || p >= static_cast<int>(images.size()))
      throw std::invalid_argument("mix: permutation index out of range");
}

}  // namespace

void mixup_batch(std::vector<Image>& images, std::vector<Vec>& labels, double lambda,
                 const std::vector<int>& perm) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("mixup_batch: lambda must be in [0, 1]");
  require_mix_inputs(images, labels, perm);
  const std::vector<Image> src_images = images;
  const std::vector<Vec> src_labels = labels;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t j = static_cast<std::size_t>(perm[i]);
    images[i].data = lambda * src_images[i].data + (1.0 - lambda) * src_images[j].data;
    labels[i] = lambda * src_labels[i] + (1.0 - lambda) * src_labels[j];
  }
}

double cutmix_batch(std::vector<Image>& images, std::vector<Vec>& labels, int box_y0, int box_x0,
                    int box_h, int box_w, const std::vector<int>& perm) {
  require_mix_inputs(images, labels, perm);
  const Image& first = images[0];
  if (box_h < 0 || box_w < 0 || box_y0 < 0 || box_x0 < 0 || box_y0 + box_h > first.height ||
      box_x0 + box_w > first.width)
    throw std::invalid_argument("cutmix_batch: box outside the image");
  const double lambda_eff =
      1.0 - static_cast<double>(box_h) * box_w / (static_cast<double>(first.height) * first.width);
  const std::vector<Image> src_images = images;
  const std::vector<Vec> src_labels = labels;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::size_t j = static_cast<std::size_t>(perm[i]);
    for (int c = 0; c < first.channels; ++c)
      for (int y = box_y0; y < box_y0 + box_h; ++y)
        for (int x = box_x0; x < box_x0 + box_w; ++x)
          images[i].at(c, y, x) = src_images[j].at(c, y, x);
    labels[i] = lambda_eff * src_labels[i] + (1.0 - lambda_eff) * src_labels[j];
  }
  return lambda_eff;
}

MixRecord draw_cutmix_box(int height, int width, double lambda, Rng& rng) {
  if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("draw_cutmix_box: lambda must be in [0, 1]");
  MixRecord rec;
  rec.kind = MixRecord::Kind::cutmix;
  rec.lambda = lambda;
  const double ratio = std::sqrt(1.0 - lambda);
  const int cut_h = static_cast<int>(std::floor(height * ratio));
  const int cut_w = static_cast<int>(std::floor(width * ratio));
  const int cy = rng.uniform_int(height);
  const int cx = rng.uniform_int(width);
  const int y0 = std::max(0, cy - cut_h / 2);
  const int x0 = std::max(0, cx - cut_w / 2);
  const int y1 = std::min(height, cy + (cut_h + 1) / 2);
  const int x1 = std::min(width, cx + (cut_w + 1) / 2);
  rec.box_y0 = y0;
  rec.box_x0 = x0;
  rec.box_h = y1 - y0;
  rec.box_w = x1 - x0;
  return rec;
}

TwoViewBatch make_two_view_batch(const std::vector<std::pair<Image, int>>& samples, Rng& rng,
                                 const TwoViewConfig& config) {
  if (samples.empty()) throw std::invalid_argument("make_two_view_batch: empty batch");
  config.policy.validate();
  const int n = static_cast<int>(samples.size());
  const int classes = config.num_classes;

  TwoViewBatch batch;
  batch.views_a.reserve(static_cast<std::size_t>(n));
  batch.views_b.reserve(static_cast<std::size_t>(n));
  batch.mixed_labels.reserve(static_cast<std::size_t>(n));

  for (const auto& [image, label] : samples) {
    if (label < 0 || label >= classes)
      throw std::invalid_argument("make_two_view_batch: label out of range");
    batch.views_a.push_back(sample_view(image, rng, config.policy));
    batch.views_b.push_back(sample_view(image, rng, config.policy));
    Vec one_hot = Vec::Zero(classes);
    one_hot[label] = 1.0;
    batch.mixed_labels.push_back(label_smoothing(one_hot, config.epsilon_smooth, classes));
  }

  if (config.mix_prob > 0.0 && rng.uniform() < config.mix_prob) {
    const bool use_mixup = rng.uniform() < 0.5;
    const std::vector<int> perm = rng.permutation(n);
    if (use_mixup) {
      const double lambda = rng.beta(config.mixup_alpha, config.mixup_alpha);
      batch.mix.kind = MixRecord::Kind::mixup;
      batch.mix.lambda = lambda;
      batch.mix.lambda_eff = lambda;
      batch.mix.perm = perm;
      std::vector<Vec> labels_b = batch.mixed_labels;  // same arithmetic for both view sets
      mixup_batch(batch.views_a, batch.mixed_labels, lambda, perm);
      mixup_batch(batch.views_b, labels_b, lambda, perm);
    } else {
      const double lambda = rng.beta(config.cutmix_alpha, config.cutmix_alpha);
      MixRecord rec = draw_cutmix_box(batch.views_a[0].height, batch.views_a[0].width, lambda, rng);
      rec.perm = perm;
      std::vector<Vec> labels_b = batch.mixed_labels;
      rec.lambda_eff = cutmix_batch(batch.views_a, batch.mixed_labels, rec.box_y0, rec.box_x0,
                                    rec.box_h, rec.box_w, perm);
      cutmix_batch(batch.views_b, labels_b, rec.box_y0, rec.box_x0, rec.box_h, rec.box_w, perm);
      batch.mix = std::move(rec);
    }
  }

  return batch;
}

}  // namespace attrep
