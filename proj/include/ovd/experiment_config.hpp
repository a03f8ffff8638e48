#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ovd/errors.hpp"
#include "ovd/integrator.hpp"
#include "ovd/keyvalue.hpp"
#include "ovd/model_law.hpp"
#include "ovd/ov_function.hpp"
#include "ovd/ring.hpp"
#include "ovd/stability.hpp"

namespace ovd {

enum class Preset { StablePaper, UnstablePaper, UnstableLong };

inline std::string to_string(Preset p) {
  switch (p) {
    case Preset::StablePaper: return "stable_paper";
    case Preset::UnstablePaper: return "unstable_paper";
    case Preset::UnstableLong: return "unstable_long";
  }
  return "?";
}

/// Accepts stable_paper, stable-paper, StablePaper (case-insensitive).
inline Preset parse_preset(std::string_view name) {
  std::string key;
  for (char ch : name) {
    if (ch == '_' || ch == '-') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (key == "stablepaper") return Preset::StablePaper;
  if (key == "unstablepaper") return Preset::UnstablePaper;
  if (key == "unstablelong") return Preset::UnstableLong;
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "euler") return Scheme::ForwardEuler;
  if (name == "rk4") return Scheme::RungeKutta4;
  throw ConfigError("unknown scheme '" + std::string(name) + "' (expected euler or rk4)");
}

struct ModelParams {
  ModelLaw::Kind kind = ModelLaw::Kind::HybridOvd;
  /// Hybrid acceleration scale: absolute `a`, or `a_ratio` times a*.
  std::optional<double> a;
  std::optional<double> a_ratio = 2.2;
  double alpha = 0.5;
  double v_floor = ModelLaw::kDefaultVelocityFloor;
};

struct OvParams {
  OvFunction::Kind kind = OvFunction::Kind::Tanh;
  double v_max = 30.0;
  double h_c = 25.0;
  double ell = 10.0;
};

struct PerturbationParams {
  std::size_t index = 0;
  /// Absolute displacement; when unset, dx = dx_rel * b.
  std::optional<double> dx;
  double dx_rel = 0.01;
};

struct JerkParams {
  double v_des = 20.0;
  double a = 5.0;
  /// Defaults to the matched value 2a/V.
  std::optional<double> alpha;
  double v_min = 0.0;
  double v_max = 30.0;
  double v_step = 0.5;
};

struct SweepParams {
  std::vector<double> a_ratios{0.5, 0.8, 1.0, 1.2, 2.2};
  std::vector<double> b_values{0.5, 1.0, 2.0};
  bool parallel = true;
};

/// Everything a CLI command needs. Defaults equal the StablePaper preset.
struct ExperimentConfig {
  std::optional<Preset> preset;
  ModelParams model;
  OvParams ov;
  RingConfig ring{100, 200.0};
  IntegrationPlan plan{Scheme::ForwardEuler, 0.1, 100.0, 1, false};
  PerturbationParams perturbation;
  std::vector<std::size_t> modes{10, 20, 30, 40, 50};
  double growth_t0 = 5.0;
  double growth_t1 = 30.0;
  std::vector<double> threshold_b_grid{0.25, 0.5, 1.0, 2.0, 3.0};
  SweepParams sweep;
  JerkParams jerk;
  std::string output_dir = "out";

  OvFunction ov_function() const {
    if (ov.kind == OvFunction::Kind::Tanh) return OvFunction::tanh();
    return OvFunction::sigmoid(ov.v_max, ov.h_c, ov.ell);
  }

  EquilibriumInfo equilibrium() const { return equilibrium_info(ov_function(), ring); }

  /// Hybrid acceleration scale after resolving a_ratio against a*.
  double hybrid_a() const {
    if (model.a) return *model.a;
    if (model.a_ratio) return *model.a_ratio * equilibrium().a_star;
    throw ConfigError("hybrid model needs model.a or model.a_ratio");
  }

  ModelLaw law() const {
    if (model.kind == ModelLaw::Kind::ClassicalOvm) return ModelLaw::classical_ovm(model.alpha);
    return ModelLaw::hybrid_ovd(hybrid_a(), model.v_floor);
  }

  double perturbation_dx() const {
    return perturbation.dx ? *perturbation.dx : perturbation.dx_rel * ring.spacing();
  }

  RingState initial_state() const {
    return perturb(uniform_flow(ring, ov_function()), perturbation.index, perturbation_dx());
  }

  void validate() const {
    ring.validate();
    plan.validate();
    (void)law();
    if (perturbation.index >= ring.n_vehicles) throw ConfigError("perturbation.index out of range");
    for (std::size_t k : modes) {
      if (k >= ring.n_vehicles) throw ConfigError("diagnostics mode " + std::to_string(k) + " >= N");
    }
  }
};

inline void apply_preset(ExperimentConfig& cfg, Preset p) {
  cfg.preset = p;
  cfg.model = ModelParams{};
  cfg.ov = OvParams{};
  cfg.ring = RingConfig{100, 200.0};
  cfg.plan = IntegrationPlan{Scheme::ForwardEuler, 0.1, 100.0, 1, false};
  cfg.perturbation = PerturbationParams{};
  cfg.modes = {10, 20, 30, 40, 50};
  cfg.model.a_ratio = 2.2;
  if (p == Preset::UnstablePaper || p == Preset::UnstableLong) {
    cfg.ring.ring_length = 50.0;
    cfg.model.a_ratio = 0.5;
  }
  if (p == Preset::UnstableLong) cfg.plan.t_end = 300.0;
}

inline ExperimentConfig preset_config(Preset p) {
  ExperimentConfig cfg;
  apply_preset(cfg, p);
  return cfg;
}

/// Applies every key of `kv` to `cfg`. Unknown keys are rejected.
inline void apply_key_values(ExperimentConfig& cfg, const KeyValues& kv) {
  if (kv.contains("model.a") && kv.contains("model.a_ratio")) {
    throw ConfigError("set only one of model.a and model.a_ratio");
  }
  if (kv.contains("perturbation.dx") && kv.contains("perturbation.dx_rel")) {
    throw ConfigError("set only one of perturbation.dx and perturbation.dx_rel");
  }
  for (const auto& [key, value] : kv) {
    if (key == "preset") {
      continue;  // handled by load_config
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else if (key == "model.kind") {
      if (value == "hybrid") cfg.model.kind = ModelLaw::Kind::HybridOvd;
      else if (value == "ovm") cfg.model.kind = ModelLaw::Kind::ClassicalOvm;
      else throw ConfigError("model.kind must be hybrid or ovm");
    } else if (key == "model.a") {
      cfg.model.a = parse_double(value, key);
      cfg.model.a_ratio.reset();
    } else if (key == "model.a_ratio") {
      cfg.model.a_ratio = parse_double(value, key);
      cfg.model.a.reset();
    } else if (key == "model.alpha") {
      cfg.model.alpha = parse_double(value, key);
    } else if (key == "model.v_floor") {
      cfg.model.v_floor = parse_double(value, key);
    } else if (key == "ov.kind") {
      if (value == "tanh") cfg.ov.kind = OvFunction::Kind::Tanh;
      else if (value == "sigmoid") cfg.ov.kind = OvFunction::Kind::Sigmoid;
      else throw ConfigError("ov.kind must be tanh or sigmoid");
    } else if (key == "ov.v_max") {
      cfg.ov.v_max = parse_double(value, key);
    } else if (key == "ov.h_c") {
      cfg.ov.h_c = parse_double(value, key);
    } else if (key == "ov.ell") {
      cfg.ov.ell = parse_double(value, key);
    } else if (key == "ring.n_vehicles") {
      cfg.ring.n_vehicles = parse_count(value, key);
    } else if (key == "ring.length") {
      cfg.ring.ring_length = parse_double(value, key);
    } else if (key == "plan.scheme") {
      cfg.plan.scheme = parse_scheme(value);
    } else if (key == "plan.dt") {
      cfg.plan.dt = parse_double(value, key);
    } else if (key == "plan.t_end") {
      cfg.plan.t_end = parse_double(value, key);
    } else if (key == "plan.record_stride") {
      cfg.plan.record_stride = parse_count(value, key);
    } else if (key == "plan.clamp_nonnegative") {
      cfg.plan.clamp_nonnegative = parse_bool(value, key);
    } else if (key == "perturbation.index") {
      cfg.perturbation.index = parse_count(value, key);
    } else if (key == "perturbation.dx") {
      cfg.perturbation.dx = parse_double(value, key);
    } else if (key == "perturbation.dx_rel") {
      cfg.perturbation.dx_rel = parse_double(value, key);
      cfg.perturbation.dx.reset();
    } else if (key == "diagnostics.modes") {
      cfg.modes = parse_count_list(value, key);
    } else if (key == "diagnostics.growth_window") {
      const auto w = parse_double_list(value, key);
      if (w.size() != 2) throw ConfigError("diagnostics.growth_window needs two values");
      cfg.growth_t0 = w[0];
      cfg.growth_t1 = w[1];
    } else if (key == "threshold.b_grid") {
      cfg.threshold_b_grid = parse_double_list(value, key);
    } else if (key == "sweep.a_ratios") {
      cfg.sweep.a_ratios = parse_double_list(value, key);
    } else if (key == "sweep.b_values") {
      cfg.sweep.b_values = parse_double_list(value, key);
    } else if (key == "sweep.parallel") {
      cfg.sweep.parallel = parse_bool(value, key);
    } else if (key == "jerk.v_des") {
      cfg.jerk.v_des = parse_double(value, key);
    } else if (key == "jerk.a") {
      cfg.jerk.a = parse_double(value, key);
    } else if (key == "jerk.alpha") {
      cfg.jerk.alpha = parse_double(value, key);
    } else if (key == "jerk.v_min") {
      cfg.jerk.v_min = parse_double(value, key);
    } else if (key == "jerk.v_max") {
      cfg.jerk.v_max = parse_double(value, key);
    } else if (key == "jerk.v_step") {
      cfg.jerk.v_step = parse_double(value, key);
    } else {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
}

/// Defaults, then the preset (the explicit argument wins over the file's
/// `preset` key), then the remaining file keys.
inline ExperimentConfig load_config(const KeyValues& kv, std::optional<Preset> preset_override) {
  ExperimentConfig cfg;
  std::optional<Preset> preset = preset_override;
  if (!preset) {
    if (auto it = kv.find("preset"); it != kv.end()) preset = parse_preset(it->second);
  }
  if (preset) apply_preset(cfg, *preset);
  apply_key_values(cfg, kv);
  return cfg;
}

inline KeyValues read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

}  // namespace ovd
