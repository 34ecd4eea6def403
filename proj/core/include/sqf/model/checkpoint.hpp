#pragma once

#include <map>
#include <string>
#include <vector>

#include "sqf/model/params.hpp"

namespace sqf::model {

// Side payload carried next to the model weights: extra named tensors (for
// optimizer moments, averaged weights) and string metadata (step counters,
// generator state). Both are written in a fixed order so save -> load ->
// save is byte-identical.
struct CheckpointExtra {
  std::vector<NamedTensor> tensors;
  std::map<std::string, std::string> meta;
};

void save_checkpoint(const std::string& path, const Parameters& params,
                     const CheckpointExtra* extra = nullptr);

// Throws IoError on missing file, ParseError on a malformed container,
// ShapeError when a stored tensor disagrees with the config's registry.
Parameters load_checkpoint(const std::string& path,
                           CheckpointExtra* extra = nullptr);

}  // namespace sqf::model
