#include "powalloc/scenario_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "powalloc/errors.hpp"
#include "powalloc/units.hpp"

namespace powalloc {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    if (allowed.find(item.key()) == allowed.end()) {
      throw InvalidConfigError("unknown key \"" + item.key() + "\" in " +
                               where);
    }
  }
}

double require_number(const json& obj, const std::string& key,
                      const std::string& where) {
  if (!obj.contains(key)) {
    throw InvalidConfigError("missing key \"" + key + "\" in " + where);
  }
  const json& value = obj.at(key);
  if (!value.is_number()) {
    throw InvalidConfigError("key \"" + key + "\" in " + where +
                             " must be a number");
  }
  return value.get<double>();
}

NoiseConfig parse_noise(const json& obj, double bandwidth_hz) {
  if (!obj.is_object()) {
    throw InvalidConfigError("\"noise\" must be an object");
  }
  reject_unknown_keys(obj, {"mode", "noise_dbm", "temperature_k"}, "noise");
  if (!obj.contains("mode") || !obj.at("mode").is_string()) {
    throw InvalidConfigError("noise needs a \"mode\" string");
  }
  const std::string mode = obj.at("mode").get<std::string>();
  if (mode == "explicit") {
    if (obj.contains("temperature_k")) {
      throw InvalidConfigError(
          "noise key \"temperature_k\" is not valid in explicit mode");
    }
    const double noise_dbm = require_number(obj, "noise_dbm", "noise");
    return NoiseConfig::explicit_power(bandwidth_hz, dbm_to_watts(noise_dbm));
  }
  if (mode == "thermal") {
    if (obj.contains("noise_dbm")) {
      throw InvalidConfigError(
          "noise key \"noise_dbm\" is not valid in thermal mode");
    }
    const double temperature = require_number(obj, "temperature_k", "noise");
    return NoiseConfig::thermal(bandwidth_hz, temperature);
  }
  throw InvalidConfigError("noise mode must be \"explicit\" or \"thermal\"");
}

PowerModel parse_power_model(const json& obj) {
  if (!obj.is_object()) {
    throw InvalidConfigError("\"power_model\" must be an object");
  }
  reject_unknown_keys(obj, {"preset", "load_factor", "p0_w", "p_max_dbm"},
                      "power_model");
  const bool has_preset = obj.contains("preset");
  const bool has_explicit = obj.contains("p0_w") || obj.contains("p_max_dbm");
  if (has_preset && has_explicit) {
    throw InvalidConfigError(
        "power_model takes either a preset or the explicit "
        "{p0_w, load_factor, p_max_dbm} triple, not a mixture");
  }
  if (has_preset) {
    if (!obj.at("preset").is_string()) {
      throw InvalidConfigError("power_model \"preset\" must be a string");
    }
    const std::string name = obj.at("preset").get<std::string>();
    const BsPreset* preset = find_preset(name);
    if (preset == nullptr) {
      throw InvalidConfigError("unknown power_model preset \"" + name +
                               "\" (expected macro|micro|pico|femto)");
    }
    double load_factor = 1.0;
    if (obj.contains("load_factor")) {
      load_factor = require_number(obj, "load_factor", "power_model");
    }
    return model_from_preset(*preset, load_factor);
  }
  PowerModel model;
  model.p0_w = require_number(obj, "p0_w", "power_model");
  model.load_factor = require_number(obj, "load_factor", "power_model");
  model.p_max_w = dbm_to_watts(require_number(obj, "p_max_dbm", "power_model"));
  validate(model);
  return model;
}

}  // namespace

LoadedScenario parse_scenario_text(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidConfigError(std::string("scenario is not valid JSON: ") +
                             e.what());
  }
  if (!doc.is_object()) {
    throw InvalidConfigError("scenario document must be a JSON object");
  }
  reject_unknown_keys(
      doc, {"bandwidth_hz", "noise", "p_max_dbm", "links", "power_model"},
      "scenario");

  const double bandwidth_hz = require_number(doc, "bandwidth_hz", "scenario");
  if (!doc.contains("noise")) {
    throw InvalidConfigError("missing key \"noise\" in scenario");
  }

  LoadedScenario loaded;
  loaded.scenario.noise = parse_noise(doc.at("noise"), bandwidth_hz);

  if (doc.contains("p_max_dbm") && !doc.at("p_max_dbm").is_null()) {
    if (!doc.at("p_max_dbm").is_number()) {
      throw InvalidConfigError("\"p_max_dbm\" must be a number or null");
    }
    loaded.scenario.p_max_w = dbm_to_watts(doc.at("p_max_dbm").get<double>());
  }

  if (!doc.contains("links") || !doc.at("links").is_array() ||
      doc.at("links").empty()) {
    throw InvalidConfigError("scenario needs a non-empty \"links\" array");
  }
  for (const json& link_obj : doc.at("links")) {
    if (!link_obj.is_object()) {
      throw InvalidConfigError("each link must be an object");
    }
    reject_unknown_keys(link_obj, {"gain_db", "rate_bps"}, "links");
    LinkSpec link;
    link.gain_linear = db_to_linear(require_number(link_obj, "gain_db", "links"));
    link.target_rate_bps = require_number(link_obj, "rate_bps", "links");
    loaded.scenario.links.push_back(link);
  }

  if (doc.contains("power_model")) {
    loaded.power_model = parse_power_model(doc.at("power_model"));
  }

  validate(loaded.scenario);
  return loaded;
}

LoadedScenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidConfigError("cannot read scenario file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

nlohmann::json scenario_to_json(const Scenario& scenario,
                                const std::optional<PowerModel>& model) {
  json doc;
  doc["bandwidth_hz"] = scenario.noise.bandwidth_hz;
  json noise;
  if (scenario.noise.mode == NoiseMode::kThermal) {
    noise["mode"] = "thermal";
    noise["temperature_k"] = scenario.noise.temperature_k;
  } else {
    noise["mode"] = "explicit";
    noise["noise_dbm"] = watts_to_dbm(scenario.noise.noise_power_w);
  }
  doc["noise"] = noise;
  doc["p_max_dbm"] = scenario.has_power_cap()
                         ? json(watts_to_dbm(scenario.p_max_w))
                         : json(nullptr);
  json links = json::array();
  for (const LinkSpec& link : scenario.links) {
    links.push_back({{"gain_db", linear_to_db(link.gain_linear)},
                     {"rate_bps", link.target_rate_bps}});
  }
  doc["links"] = links;
  if (model) {
    doc["power_model"] = {{"p0_w", model->p0_w},
                          {"load_factor", model->load_factor},
                          {"p_max_dbm", watts_to_dbm(model->p_max_w)}};
  }
  return doc;
}

}  // namespace powalloc
