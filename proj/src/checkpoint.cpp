#include "attrep/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace attrep {

namespace {

constexpr char kMagic[8] = {'A', 'T', 'R', 'P', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  write_u64(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(double)) * v.size());
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in)
    throw CheckpointError("checkpoint " + path + ": truncated at offset " +
                          std::to_string(static_cast<long>(in.tellg())));
  return v;
}

Eigen::VectorXd read_vector(std::istream& in, const std::string& path, std::uint64_t expected) {
  const std::uint64_t n = read_u64(in, path);
  if (n != expected)
    throw CheckpointError("checkpoint " + path + ": array length " + std::to_string(n) +
                          " does not match header count " + std::to_string(expected));
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * n));
  if (!in)
    throw CheckpointError("checkpoint " + path + ": truncated at offset " +
                          std::to_string(static_cast<long>(in.tellg())));
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  nlohmann::json header{{"format_version", kFormatVersion},
                        {"config_digest", config_digest(ckpt.config)},
                        {"code_revision", code_revision()},
                        {"config", run_config_to_json(ckpt.config)},
                        {"epoch", ckpt.state.epoch},
                        {"step", ckpt.state.step},
                        {"teacher_step_count", ckpt.state.teacher_step_count},
                        {"param_count", ckpt.state.params.size()},
                        {"rng_state", ckpt.state.rng_state}};
  const std::string header_str = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot write " + tmp);
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kFormatVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    write_u64(out, header_str.size());
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    write_vector(out, ckpt.state.params);
    write_vector(out, ckpt.state.teacher_params);
    write_vector(out, ckpt.state.square_avg);
    write_vector(out, ckpt.state.momentum_buf);
    out.write(kMagic, sizeof(kMagic));  // trailing sentinel guards truncation
    if (!out) throw CheckpointError("checkpoint: write failure on " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);

  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("checkpoint " + path + ": bad magic at offset 0");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in) throw CheckpointError("checkpoint " + path + ": truncated at offset 8");
  if (version != kFormatVersion)
    throw CheckpointError("checkpoint " + path + ": format version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kFormatVersion) + ")");

  const std::uint64_t header_len = read_u64(in, path);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (!in)
    throw CheckpointError("checkpoint " + path + ": truncated header at offset " +
                          std::to_string(static_cast<long>(in.tellg())));

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError("checkpoint " + path + ": corrupt header: " + e.what());
  }

  Checkpoint ckpt;
  ckpt.config = run_config_from_json(header.at("config"));
  ckpt.state.epoch = header.at("epoch").get<int>();
  ckpt.state.step = header.at("step").get<long>();
  ckpt.state.teacher_step_count = header.at("teacher_step_count").get<long>();
  ckpt.state.rng_state = header.at("rng_state").get<std::string>();
  const std::uint64_t param_count = header.at("param_count").get<std::uint64_t>();

  ckpt.state.params = read_vector(in, path, param_count);
  ckpt.state.teacher_params = read_vector(in, path, param_count);
  ckpt.state.square_avg = read_vector(in, path, param_count);
  ckpt.state.momentum_buf = read_vector(in, path, param_count);

  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CheckpointError("checkpoint " + path + ": missing trailing sentinel (truncated file)");
  return ckpt;
}

}  // namespace attrep
