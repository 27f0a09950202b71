#include "attrep/data.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "attrep/rng.hpp"

namespace attrep {

Image Dataset::image01(int index) const {
  if (index < 0 || index >= size()) throw std::invalid_argument("Dataset::image01: index out of range");
  Image img(channels, height, width);
  const long off = static_cast<long>(index) * record_size();
  for (long i = 0; i < record_size(); ++i)
    img.data[i] = static_cast<double>(pixels[static_cast<std::size_t>(off + i)]) / 255.0;
  return img;
}

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

void Dataset::validate() const {
  if (labels.empty()) throw std::invalid_argument("Dataset: empty");
  if (pixels.size() != static_cast<std::size_t>(labels.size()) * static_cast<std::size_t>(record_size()))
    throw std::invalid_argument("Dataset: pixel buffer size mismatch");
  for (int l : labels)
    if (l < 0 || l >= num_classes) throw std::invalid_argument("Dataset: label out of range");
}

Dataset load_cifar10_binary(const std::string& file) {
  constexpr long kRecord = 3073;
  constexpr long kPixels = 3072;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("load_cifar10_binary: cannot open " + file);
  in.seekg(0, std::ios::end);
  const long bytes = static_cast<long>(in.tellg());
  in.seekg(0);
  if (bytes == 0 || bytes % kRecord != 0)
    throw std::runtime_error("load_cifar10_binary: " + file + " has " + std::to_string(bytes) +
                             " bytes, not a multiple of 3073");
  const long n = bytes / kRecord;
  Dataset ds;
  ds.channels = 3;
  ds.height = 32;
  ds.width = 32;
  ds.num_classes = 10;
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.pixels.resize(static_cast<std::size_t>(n * kPixels));
  for (long i = 0; i < n; ++i) {
    unsigned char label = 0;
    in.read(reinterpret_cast<char*>(&label), 1);
    in.read(reinterpret_cast<char*>(ds.pixels.data() + i * kPixels), kPixels);
    if (!in) throw std::runtime_error("load_cifar10_binary: short read in " + file);
    if (label > 9)
      throw std::runtime_error("load_cifar10_binary: record " + std::to_string(i) +
                               " has label byte " + std::to_string(label) + " > 9");
    ds.labels[static_cast<std::size_t>(i)] = static_cast<int>(label);
  }
  ds.split_tag = std::filesystem::path(file).filename().string();
  return ds;
}

Dataset load_cifar10_dir(const std::string& dir, const std::string& split) {
  std::vector<std::string> files;
  if (split == "train") {
    for (int i = 1; i <= 5; ++i) files.push_back(dir + "/data_batch_" + std::to_string(i) + ".bin");
  } else if (split == "test") {
    files.push_back(dir + "/test_batch.bin");
  } else {
    throw std::invalid_argument("load_cifar10_dir: split must be train or test");
  }
  Dataset all;
  bool first = true;
  for (const auto& f : files) {
    Dataset part = load_cifar10_binary(f);
    if (first) {
      all = std::move(part);
      first = false;
    } else {
      all.pixels.insert(all.pixels.end(), part.pixels.begin(), part.pixels.end());
      all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
    }
  }
  all.split_tag = split;
  return all;
}

Dataset make_synthetic_blobs(int num_classes, int n_per_class, int image_size, std::uint64_t seed,
                             double noise_stddev) {
  if (num_classes < 2) throw std::invalid_argument("make_synthetic_blobs: need at least two classes");
  if (n_per_class < 1) throw std::invalid_argument("make_synthetic_blobs: n_per_class must be >= 1");
  if (image_size < 4) throw std::invalid_argument("make_synthetic_blobs: image_size must be >= 4");
  if (noise_stddev < 0.0) throw std::invalid_argument("make_synthetic_blobs: noise_stddev must be >= 0");

  Rng rng(seed);
  const int channels = 3;
  const int s = image_size;

  // Per class and channel, a smooth texture: a few random low-frequency
  // cosine waves around mid gray.
  std::vector<std::vector<double>> templates(static_cast<std::size_t>(num_classes));
  for (int c = 0; c < num_classes; ++c) {
    auto& t = templates[static_cast<std::size_t>(c)];
    t.assign(static_cast<std::size_t>(channels) * s * s, 128.0);
    for (int ch = 0; ch < channels; ++ch) {
      for (int wave = 0; wave < 3; ++wave) {
        const double fy = rng.uniform(0.5, 2.5);
        const double fx = rng.uniform(0.5, 2.5);
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const double amp = rng.uniform(18.0, 34.0);
        for (int y = 0; y < s; ++y)
          for (int x = 0; x < s; ++x)
            t[static_cast<std::size_t>((ch * s + y) * s + x)] +=
                amp * std::cos(2.0 * M_PI * (fy * y + fx * x) / s + phase);
      }
    }
  }

  Dataset ds;
  ds.channels = channels;
  ds.height = s;
  ds.width = s;
  ds.num_classes = num_classes;
  ds.split_tag = "synthetic";
  ds.labels.reserve(static_cast<std::size_t>(num_classes) * n_per_class);
  ds.pixels.reserve(ds.labels.capacity() * static_cast<std::size_t>(channels) * s * s);
  for (int c = 0; c < num_classes; ++c) {
    const auto& t = templates[static_cast<std::size_t>(c)];
    for (int i = 0; i < n_per_class; ++i) {
      ds.labels.push_back(c);
      for (std::size_t px = 0; px < t.size(); ++px) {
        const double v = t[px] + noise_stddev * rng.normal();
        ds.pixels.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l)));
      }
    }
  }
  return ds;
}

std::pair<Dataset, Dataset> split_per_class(const Dataset& ds, int n_per_class, std::uint64_t seed) {
  ds.validate();
  if (n_per_class < 1) throw std::invalid_argument("split_per_class: n_per_class must be >= 1");
  std::vector<std::vector<int>> per_class(static_cast<std::size_t>(ds.num_classes));
  for (int i = 0; i < ds.size(); ++i)
    per_class[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
  for (int c = 0; c < ds.num_classes; ++c) {
    if (static_cast<int>(per_class[static_cast<std::size_t>(c)].size()) < n_per_class)
      throw std::invalid_argument("split_per_class: class " + std::to_string(c) + " has only " +
                                  std::to_string(per_class[static_cast<std::size_t>(c)].size()) +
                                  " examples, need " + std::to_string(n_per_class));
  }
  Rng rng(seed);
  std::vector<int> selected, rest;
  for (int c = 0; c < ds.num_classes; ++c) {
    auto& idx = per_class[static_cast<std::size_t>(c)];
    const std::vector<int> shuffle = rng.permutation(static_cast<int>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int original = idx[static_cast<std::size_t>(shuffle[k])];
      if (static_cast<int>(k) < n_per_class)
        selected.push_back(original);
      else
        rest.push_back(original);
    }
  }
  std::sort(selected.begin(), selected.end());
  std::sort(rest.begin(), rest.end());

  auto gather = [&](const std::vector<int>& indices, const std::string& tag) {
    Dataset out;
    out.channels = ds.channels;
    out.height = ds.height;
    out.width = ds.width;
    out.num_classes = ds.num_classes;
    out.split_tag = tag;
    const long rec = ds.record_size();
    out.labels.reserve(indices.size());
    out.pixels.reserve(indices.size() * static_cast<std::size_t>(rec));
    for (int i : indices) {
      out.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
      const auto begin = ds.pixels.begin() + static_cast<long>(i) * rec;
      out.pixels.insert(out.pixels.end(), begin, begin + rec);
    }
    return out;
  };
  return {gather(selected, ds.split_tag + ":subsample"), gather(rest, ds.split_tag + ":holdout")};
}

Dataset subsample_per_class(const Dataset& ds, int n_per_class, std::uint64_t seed) {
  return split_per_class(ds, n_per_class, seed).first;
}

}  // namespace attrep
