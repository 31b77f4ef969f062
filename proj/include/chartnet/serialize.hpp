#pragma once

#include <string>

#include "chartnet/network.hpp"

namespace chartnet {

// Network file format: a single JSON document
//   {"input_dim": .., "output_dim": .., "layers": [
//      {"rows": .., "cols": .., "triplets": [[r, c, v], ...],
//       "bias": [...], "activation": "relu" | "identity"}, ...]}
// Floats are written as the shortest decimal that round-trips the 64-bit
// value, so save/load preserves every triplet exactly.
std::string network_to_json(const ReluNetwork& net);
ReluNetwork network_from_json(const std::string& text);

void save_network(const ReluNetwork& net, const std::string& path);
ReluNetwork load_network(const std::string& path);

}  // namespace chartnet
