#include "micsel/scene_io.hpp"

#include <fstream>

namespace micsel {

using nlohmann::json;

Point2 point_from_json(const json& value, const std::string& field) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number())
    throw ConfigError("field '" + field + "': expected [x, y]");
  return {value[0].get<double>(), value[1].get<double>()};
}

namespace {

double number_or(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) throw ConfigError(std::string("field '") + key + "': expected a number");
  return doc[key].get<double>();
}

std::vector<Point2> points_from_json(const json& value, const std::string& field) {
  if (!value.is_array()) throw ConfigError("field '" + field + "': expected an array of [x, y]");
  std::vector<Point2> out;
  for (size_t i = 0; i < value.size(); ++i)
    out.push_back(point_from_json(value[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

Scene scene_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("scene: expected a JSON object");
  Scene s;
  if (doc.contains("mics") && doc.contains("grid"))
    throw ConfigError("scene: give either 'mics' or 'grid', not both");
  if (doc.contains("mics")) {
    s.mics = points_from_json(doc["mics"], "mics");
  } else if (doc.contains("grid")) {
    const json& g = doc["grid"];
    if (!g.is_object()) throw ConfigError("field 'grid': expected an object");
    for (const char* key : {"nx", "ny", "width_m", "height_m"})
      if (!g.contains(key) || !g[key].is_number())
        throw ConfigError(std::string("field 'grid.") + key + "': expected a number");
    s.mics = grid_positions(g["nx"].get<int>(), g["ny"].get<int>(), g["width_m"].get<double>(),
                            g["height_m"].get<double>());
  } else {
    throw ConfigError("scene: missing 'mics' or 'grid'");
  }
  if (!doc.contains("target")) throw ConfigError("scene: missing 'target'");
  s.target = point_from_json(doc["target"], "target");
  if (!doc.contains("fc")) throw ConfigError("scene: missing 'fc'");
  s.fc = point_from_json(doc["fc"], "fc");
  if (doc.contains("interferers")) s.interferers = points_from_json(doc["interferers"], "interferers");
  s.target_psd = number_or(doc, "P_s", 1.0);
  s.self_noise_snr_db = number_or(doc, "self_noise_snr_db", 50.0);
  s.speed_of_sound = number_or(doc, "speed_of_sound", kSpeedOfSound);

  if (doc.contains("device_cost")) {
    const json& c = doc["device_cost"];
    if (c.is_number()) {
      s.device_cost.assign(s.mics.size(), c.get<double>());
    } else if (c.is_array()) {
      for (const auto& v : c) {
        if (!v.is_number()) throw ConfigError("field 'device_cost': expected numbers");
        s.device_cost.push_back(v.get<double>());
      }
    } else {
      throw ConfigError("field 'device_cost': expected a number or an array");
    }
  }

  if (doc.contains("interferer_psds")) {
    if (doc.contains("sir_db")) throw ConfigError("scene: give either 'sir_db' or 'interferer_psds'");
    for (const auto& v : doc["interferer_psds"]) {
      if (!v.is_number()) throw ConfigError("field 'interferer_psds': expected numbers");
      s.interferer_psds.push_back(v.get<double>());
    }
  } else {
    s.interferer_psds.assign(s.interferers.size(), 0.0);
    try {
      set_interferer_sir(s, number_or(doc, "sir_db", 0.0));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("scene: ") + e.what());
    }
  }

  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("scene: ") + e.what());
  }
  return s;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scene file '" + path + "': " + e.what());
  }
  return scene_from_json(doc);
}

json scene_to_json(const Scene& scene) {
  auto pt = [](const Point2& p) { return json::array({p.x(), p.y()}); };
  json mics = json::array();
  for (const auto& m : scene.mics) mics.push_back(pt(m));
  json interferers = json::array();
  for (const auto& q : scene.interferers) interferers.push_back(pt(q));
  json doc{{"mics", mics},
           {"target", pt(scene.target)},
           {"interferers", interferers},
           {"interferer_psds", scene.interferer_psds},
           {"fc", pt(scene.fc)},
           {"P_s", scene.target_psd},
           {"self_noise_snr_db", scene.self_noise_snr_db},
           {"speed_of_sound", scene.speed_of_sound}};
  if (!scene.device_cost.empty()) doc["device_cost"] = scene.device_cost;
  return doc;
}

}  // namespace micsel
