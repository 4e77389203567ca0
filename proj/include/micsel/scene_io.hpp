#pragma once

#include <string>

#include <json.hpp>

#include "micsel/scene.hpp"

namespace micsel {

// Reads a scene document. Recognized keys: `mics` (array of [x, y]) or
// `grid` ({nx, ny, width_m, height_m}), `target`, `interferers`, `fc`, `P_s`,
// `sir_db` or `interferer_psds`, `self_noise_snr_db`, `device_cost` (scalar or
// per-mic array), `speed_of_sound`. Throws ConfigError naming the bad field.
Scene scene_from_json(const nlohmann::json& doc);
Scene load_scene(const std::string& path);

nlohmann::json scene_to_json(const Scene& scene);

Point2 point_from_json(const nlohmann::json& value, const std::string& field);

}  // namespace micsel
