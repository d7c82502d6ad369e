#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "cetnet/nn.hpp"

namespace cetnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParamBlob {
  std::string name;
  Shape shape;
  std::vector<double> values;  // row-major
};

struct Checkpoint {
  nlohmann::json config;
  std::vector<ParamBlob> params;
};

Checkpoint snapshot(const nlohmann::json& config, const ParamStore& params);

/// Layout: 8-byte magic, u32 version, u64 length + config JSON, u64 blob
/// count, then per blob u32 name length, name, u32 rank, u64 dims, doubles.
/// Integers and doubles are little-endian.
void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

// Copies blob values into the matching parameters; names and shapes must agree.
void restore(const Checkpoint& ckpt, const ParamStore& params);

}  // namespace cetnet
