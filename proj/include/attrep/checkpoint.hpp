#pragma once

#include <stdexcept>
#include <string>

#include "attrep/config.hpp"
#include "attrep/train.hpp"

namespace attrep {

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

// Versioned binary snapshot of a full training state: student and teacher
// parameters, optimizer buffers, schedule position and the rng stream, plus
// the originating RunConfig. Loading a checkpoint and resuming continues the
// run bit-exactly.
struct Checkpoint {
  RunConfig config;
  Trainer::Snapshot state;
};

// Atomic write (temp file + rename). A mismatching format version or a
// truncated file is rejected with offset diagnostics, never reinterpreted.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace attrep
