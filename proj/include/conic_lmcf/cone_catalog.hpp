#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "conic_lmcf/sl_cones.hpp"

namespace conic_lmcf {

/// Built-in cones: "hl-torus-3" (Harvey-Lawson T^2 cone in C^3) and
/// "plane-3" (R^3 in C^3, a degenerate control case).
SLCone make_catalog_cone(std::string_view name);
std::vector<std::string> catalog_cone_names();

/// Custom torus-link cone from JSON:
///   {"name": str, "m": int, "dim_G": int, "link_dim": int,
///    "phase_theta": real (optional, default 0),
///    "coordinates": [[{"re": real, "im": real, "freq": [int, ...]}, ...], ...]}
/// The link metric is the one induced by the embedding.
SLCone cone_from_json(const nlohmann::json& spec);

}  // namespace conic_lmcf
