#ifndef STACKRL_CHECKPOINT_HPP_
#define STACKRL_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "stackrl/adam.hpp"
#include "stackrl/net.hpp"

namespace stackrl {

inline constexpr char kCheckpointMagic[4] = {'S', 'T', 'K', 'L'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  NetParams params;
  AdamState adam;
  int stage = 0;
  double lr = 0.0;
  std::int64_t global_steps = 0;
  std::int64_t iteration = 0;
  // Fully resolved run config text, so a checkpoint is self-describing.
  std::string config_text;
};

// Layout: "STKL", u32 version, u64 header length, header text of key=value
// lines, then every parameter array, every first-moment array and every
// second-moment array as little-endian f64 in declared order.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
std::string serialize_checkpoint(const Checkpoint& ckpt);

// Throws RuntimeFault on a bad magic, version mismatch (naming both
// versions), malformed header or truncated payload.
Checkpoint load_checkpoint(const std::filesystem::path& path);
Checkpoint deserialize_checkpoint(const std::string& bytes);

struct CheckpointHeader {
  std::uint32_t version = 0;
  // Keys in file order.
  std::vector<std::pair<std::string, std::string>> entries;
  std::string get(const std::string& key) const;
};

// Reads only the header.
CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);
CheckpointHeader parse_checkpoint_header(const std::string& bytes);

}  // namespace stackrl

#endif  // STACKRL_CHECKPOINT_HPP_
