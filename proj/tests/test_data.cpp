#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "attrep/data.hpp"

using namespace attrep;

namespace {

// Hand-written two-record CIFAR-10 binary fixture with known pixels.
std::string write_cifar_fixture() {
  const std::string path = std::filesystem::temp_directory_path() / "attrep_cifar_fixture.bin";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  // record 0: label 3, all pixels = channel index * 10 + 5
  out.put(3);
  for (int ch = 0; ch < 3; ++ch)
    for (int px = 0; px < 1024; ++px) out.put(static_cast<char>(ch * 10 + 5));
  // record 1: label 9, pixel value = (row + col) mod 256 on all channels
  out.put(9);
  for (int ch = 0; ch < 3; ++ch)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) out.put(static_cast<char>((y + x) % 256));
  return path;
}

}  // namespace

TEST_CASE("load_cifar10_binary: hand-written fixture decodes byte-exactly") {
  const std::string path = write_cifar_fixture();
  const Dataset ds = load_cifar10_binary(path);
  CHECK(ds.size() == 2);
  CHECK(ds.num_classes == 10);
  CHECK(ds.labels[0] == 3);
  CHECK(ds.labels[1] == 9);
  // record 0: channel planes hold 5, 15, 25
  CHECK(ds.pixels[0] == 5);
  CHECK(ds.pixels[1024] == 15);
  CHECK(ds.pixels[2048] == 25);
  // record 1 spot checks: (y=1, x=2) -> 3
  CHECK(ds.pixels[3072 + 1 * 32 + 2] == 3);
  const Image img = ds.image01(0);
  CHECK(img.at(0, 0, 0) == doctest::Approx(5.0 / 255.0));
  CHECK(img.at(2, 31, 31) == doctest::Approx(25.0 / 255.0));
  std::remove(path.c_str());
}

TEST_CASE("load_cifar10_binary: size and label-byte validation") {
  const std::string path =
      (std::filesystem::temp_directory_path() / "attrep_cifar_bad.bin").string();
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    for (int i = 0; i < 100; ++i) out.put(0);  // not a multiple of 3073
  }
  CHECK_THROWS_WITH_AS(load_cifar10_binary(path), doctest::Contains("not a multiple of 3073"),
                       std::runtime_error);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.put(11);  // label byte > 9
    for (int i = 0; i < 3072; ++i) out.put(0);
  }
  CHECK_THROWS_WITH_AS(load_cifar10_binary(path), doctest::Contains("label byte"),
                       std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_cifar10_binary("/nonexistent/file.bin"), std::runtime_error);
}

TEST_CASE("make_synthetic_blobs: deterministic, balanced, seed-sensitive") {
  const Dataset a = make_synthetic_blobs(4, 10, 16, 99);
  const Dataset b = make_synthetic_blobs(4, 10, 16, 99);
  CHECK(a.size() == 40);
  CHECK(a.pixels == b.pixels);
  CHECK(a.labels == b.labels);
  for (int count : a.class_counts()) CHECK(count == 10);

  const Dataset c = make_synthetic_blobs(4, 10, 16, 100);
  CHECK(a.pixels != c.pixels);
  CHECK_THROWS_AS(make_synthetic_blobs(1, 10, 16, 1), std::invalid_argument);
}

TEST_CASE("subsample_per_class: exact counts by seeded shuffle") {
  const Dataset full = make_synthetic_blobs(5, 20, 8, 7);
  const Dataset sub = subsample_per_class(full, 50 / 10, 13);
  for (int count : sub.class_counts()) CHECK(count == 5);
  CHECK(sub.size() == 25);

  // full class size: identity up to order
  const Dataset all = subsample_per_class(full, 20, 13);
  CHECK(all.size() == full.size());
  CHECK(all.class_counts() == full.class_counts());

  CHECK_THROWS_AS(subsample_per_class(full, 21, 13), std::invalid_argument);
}

TEST_CASE("subsample_per_class: different seeds give different index sets") {
  const Dataset full = make_synthetic_blobs(2, 40, 8, 11);
  const Dataset s1 = subsample_per_class(full, 10, 1);
  const Dataset s2 = subsample_per_class(full, 10, 2);
  CHECK(s1.pixels != s2.pixels);
}

TEST_CASE("split_per_class: subsample and holdout are disjoint and exhaustive") {
  const Dataset full = make_synthetic_blobs(3, 12, 8, 17);
  const auto [sub, rest] = split_per_class(full, 4, 23);
  CHECK(sub.size() == 12);
  CHECK(rest.size() == 24);
  // pixel multisets must partition: compare via sorted per-record hashes
  auto record_keys = [](const Dataset& ds) {
    std::multiset<std::string> keys;
    const long rec = ds.record_size();
    for (int i = 0; i < ds.size(); ++i)
      keys.emplace(reinterpret_cast<const char*>(ds.pixels.data() + i * rec),
                   static_cast<std::size_t>(rec));
    return keys;
  };
  auto all = record_keys(full);
  auto got = record_keys(sub);
  for (const auto& k : record_keys(rest)) got.insert(k);
  CHECK(got == all);
}
