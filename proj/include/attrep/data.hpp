#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "attrep/image.hpp"

namespace attrep {

// Labeled image set. Pixels are kept as raw 8-bit CHW records; image01()
// materializes one image as doubles in [0, 1].
struct Dataset {
  int channels = 3;
  int height = 32;
  int width = 32;
  int num_classes = 10;
  std::vector<std::uint8_t> pixels;  // size() * channels * height * width
  std::vector<int> labels;
  std::string split_tag;

  int size() const { return static_cast<int>(labels.size()); }
  long record_size() const { return static_cast<long>(channels) * height * width; }
  Image image01(int index) const;
  std::vector<int> class_counts() const;
  void validate() const;
};

// One CIFAR-10 binary file: 3073-byte records, 1 label byte + 3072 pixel
// bytes (R plane, G plane, B plane, row-major 32x32).
Dataset load_cifar10_binary(const std::string& file);

// Canonical CIFAR-10 directory: data_batch_1..5.bin for "train",
// test_batch.bin for "test".
Dataset load_cifar10_dir(const std::string& dir, const std::string& split);

// Class-conditional synthetic images: per class, a smooth random texture
// template plus per-sample Gaussian pixel noise. Deterministic per seed;
// linearly separable at low noise.
Dataset make_synthetic_blobs(int num_classes, int n_per_class, int image_size, std::uint64_t seed,
                             double noise_stddev = 48.0);

// Exactly n_per_class examples of every class, drawn by seeded shuffle.
Dataset subsample_per_class(const Dataset& ds, int n_per_class, std::uint64_t seed);

// Subsample plus its complement (holdout), both in stable index order.
std::pair<Dataset, Dataset> split_per_class(const Dataset& ds, int n_per_class, std::uint64_t seed);

}  // namespace attrep
