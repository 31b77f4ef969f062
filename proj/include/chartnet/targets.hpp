#pragma once

#include <string>

#include "chartnet/manifold.hpp"
#include "chartnet/taylor.hpp"

namespace chartnet {

// Resolve a target id for a manifold. Built-ins: "x1", "x2", "x1x2",
// "sin_angle" (sine of the intrinsic angle; circle only), "zero". Anything
// else is treated as a path to a target spec JSON:
//   {"expr": "x1*x2 + 0.5", "s": 1, "alpha": 1.0,
//    "sup_norm": 1.5, "holder_scale": 0}
// with holder_scale 0 requesting a pilot estimate.
TargetFunction resolve_target(const std::string& id, const Manifold& manifold);

}  // namespace chartnet
