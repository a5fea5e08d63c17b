#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ndpmpm/model.hpp"

namespace ndpmpm {

/// One posterior draw as stored in the JSON-lines checkpoint stream.
struct Checkpoint {
  std::size_t iteration = 0;
  Params params;
  std::optional<LatentState> latent;
};

/// Writes a single line (no trailing whitespace besides the newline).
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(const std::string& line);
std::vector<Checkpoint> read_checkpoints(std::istream& in);
std::vector<Checkpoint> load_checkpoints(const std::string& path);

/// `count` indices spread evenly over [0, available), ending at the last one.
std::vector<std::size_t> evenly_spaced(std::size_t available, std::size_t count);

}  // namespace ndpmpm
