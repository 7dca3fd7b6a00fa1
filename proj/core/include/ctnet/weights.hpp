#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ctnet/graph.hpp"

namespace ctnet {

// Weight archive: a text header (format tag, variant, input spec, tensor
// directory with shapes and byte offsets) followed by a raw little-endian
// float32 payload. Round-trips byte-exactly.
void save_weights(const NetworkGraph& g, const std::filesystem::path& file);

struct LoadReport {
    std::vector<std::string> matched;
    std::vector<std::string> missing;  // graph params absent from the archive (left at init)
    std::vector<std::string> unused;   // archive tensors with no graph counterpart
    std::string variant;
};

// Loads every name match verbatim; unmatched graph parameters keep their
// initialization. A shape conflict on a matched name is an error.
LoadReport load_weights(NetworkGraph& g, const std::filesystem::path& file);

// Plain key=value sidecar used for checkpoint metadata.
void save_sidecar(const std::filesystem::path& file,
                  const std::vector<std::pair<std::string, std::string>>& kv);
std::map<std::string, std::string> load_sidecar(const std::filesystem::path& file);

}  // namespace ctnet
