#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ovd/csv.hpp"
#include "ovd/diagnostics.hpp"
#include "ovd/errors.hpp"
#include "ovd/experiment_config.hpp"
#include "ovd/integrator.hpp"
#include "ovd/stability.hpp"

namespace ovd {

namespace fs = std::filesystem;

namespace detail {

inline fs::path prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory '" + dir + "'");
  return fs::path(dir);
}

inline void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

inline double wrap(double x, double length) {
  double w = std::fmod(x, length);
  if (w < 0.0) w += length;
  return w;
}

inline nlohmann::json describe(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["preset"] = cfg.preset ? nlohmann::json(to_string(*cfg.preset)) : nlohmann::json(nullptr);
  j["model"] = cfg.model.kind == ModelLaw::Kind::HybridOvd ? "hybrid" : "ovm";
  j["ov"] = cfg.ov_function().name();
  if (cfg.ov.kind == OvFunction::Kind::Sigmoid) {
    j["ov_params"] = {{"v_max", cfg.ov.v_max}, {"h_c", cfg.ov.h_c}, {"ell", cfg.ov.ell}};
  }
  j["n_vehicles"] = cfg.ring.n_vehicles;
  j["ring_length"] = cfg.ring.ring_length;
  j["b"] = cfg.ring.spacing();
  j["scheme"] = to_string(cfg.plan.scheme);
  j["dt"] = cfg.plan.dt;
  j["t_end"] = cfg.plan.t_end;
  j["record_stride"] = cfg.plan.record_stride;
  j["clamp_nonnegative"] = cfg.plan.clamp_nonnegative;
  j["perturbation_index"] = cfg.perturbation.index;
  j["perturbation_dx"] = cfg.perturbation_dx();
  return j;
}

/// a, a*, a/a*, classification and spectrum summary for the configured law.
inline nlohmann::json stability_summary(const ExperimentConfig& cfg) {
  const auto eq = cfg.equilibrium();
  const auto law = cfg.law();
  const auto dc = DispersionCoefficients::of(law, eq);
  const auto spectrum = full_spectrum(dc, cfg.ring.n_vehicles);
  nlohmann::json j;
  j["c"] = eq.c;
  j["f"] = eq.f;
  j["a_star"] = eq.a_star;
  if (law.is_hybrid()) {
    j["a"] = law.rate();
    j["a_over_a_star"] = law.rate() / eq.a_star;
  } else {
    j["alpha"] = law.rate();
    j["alpha_over_2f"] = law.rate() / (2.0 * eq.f);
  }
  j["classification"] = to_string(classify(law, eq));
  j["max_re_lambda"] = max_real_part(spectrum);
  j["fastest_mode"] = fastest_mode(spectrum);
  j["fastest_growth_rate"] = spectrum[fastest_mode(spectrum)].lambda_plus.real();
  return j;
}

inline void write_simulation_files(const fs::path& dir, const ExperimentConfig& cfg,
                                   const TrajectoryRecord& rec) {
  const double L = cfg.ring.ring_length;
  {
    CsvWriter w((dir / "trajectories.csv").string());
    w.field("t").field("vehicle").field("x_unwrapped").field("x_wrapped").field("v").end_row();
    for (std::size_t s = 0; s < rec.samples(); ++s) {
      for (std::size_t n = 0; n < rec.positions.cols(); ++n) {
        const double x = rec.positions(s, n);
        w.field(rec.times[s]).field(n).field(x).field(wrap(x, L)).field(rec.velocities(s, n)).end_row();
      }
    }
    w.close();
  }
  {
    CsvWriter w((dir / "velocities.csv").string());
    w.field("t");
    for (std::size_t n = 0; n < rec.velocities.cols(); ++n) w.field("v_" + std::to_string(n));
    w.end_row();
    for (std::size_t s = 0; s < rec.samples(); ++s) {
      w.field(rec.times[s]);
      for (double v : rec.velocities.row(s)) w.field(v);
      w.end_row();
    }
    w.close();
  }
  {
    const auto series = fourier_amplitudes(rec, cfg.equilibrium(), cfg.modes);
    CsvWriter w((dir / "fourier.csv").string());
    w.field("time");
    for (std::size_t k : series.modes) w.field("A_" + std::to_string(k));
    w.end_row();
    for (std::size_t s = 0; s < series.times.size(); ++s) {
      w.field(series.times[s]);
      for (double a : series.amplitudes.row(s)) w.field(a);
      w.end_row();
    }
    w.close();
  }
}

}  // namespace detail

struct SimulationResult {
  TrajectoryRecord record;
  FourierSeries fourier;
  nlohmann::json meta;
};

/// Runs one ring simulation and writes trajectories.csv, velocities.csv,
/// fourier.csv and meta.json. On divergence the partial record is flushed,
/// meta.json notes the failing step, and IntegrationDiverged is rethrown.
inline SimulationResult cmd_simulate(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto dir = detail::prepare_output_dir(cfg.output_dir);
  const auto started = std::chrono::steady_clock::now();

  nlohmann::json meta;
  meta["command"] = "simulate";
  meta["config"] = detail::describe(cfg);
  meta["stability"] = detail::stability_summary(cfg);

  auto finish = [&](const TrajectoryRecord& rec, const char* status) {
    meta["status"] = status;
    meta["samples"] = rec.samples();
    meta["min_velocity"] = rec.meta.min_velocity;
    meta["max_velocity"] = rec.meta.max_velocity;
    meta["collision"] = rec.meta.collision;
    meta["first_collision_time"] = rec.meta.first_collision_time;
    detail::write_simulation_files(dir, cfg, rec);
    meta["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    detail::write_json(dir / "meta.json", meta);
  };

  SimulationResult result;
  try {
    result.record = run(cfg.initial_state(), cfg.law(), cfg.ov_function(), cfg.ring, cfg.plan);
  } catch (const TrajectoryDiverged& e) {
    meta["failed_step"] = e.step();
    finish(e.partial(), "diverged");
    throw IntegrationDiverged(e.step(), e.what());
  }
  finish(result.record, "ok");
  result.fourier = fourier_amplitudes(result.record, cfg.equilibrium(), cfg.modes);
  result.meta = meta;
  return result;
}

struct SpectrumResult {
  std::vector<SpectrumPoint> spectrum;
  nlohmann::json meta;
};

/// Writes spectrum.csv (m, k, re/im of both roots) and meta.json.
inline SpectrumResult cmd_spectrum(const ExperimentConfig& cfg) {
  cfg.ring.validate();
  const auto dir = detail::prepare_output_dir(cfg.output_dir);
  const auto eq = cfg.equilibrium();
  const auto dc = DispersionCoefficients::of(cfg.law(), eq);
  SpectrumResult result;
  result.spectrum = full_spectrum(dc, cfg.ring.n_vehicles);

  CsvWriter w((dir / "spectrum.csv").string());
  w.field("m").field("k").field("re_lambda_plus").field("im_lambda_plus").field("re_lambda_minus")
      .field("im_lambda_minus").end_row();
  for (std::size_t m = 0; m < result.spectrum.size(); ++m) {
    const auto& p = result.spectrum[m];
    w.field(m).field(p.k).field(p.lambda_plus.real()).field(p.lambda_plus.imag())
        .field(p.lambda_minus.real()).field(p.lambda_minus.imag()).end_row();
  }
  w.close();

  result.meta["command"] = "spectrum";
  result.meta["config"] = detail::describe(cfg);
  result.meta["stability"] = detail::stability_summary(cfg);
  detail::write_json(dir / "meta.json", result.meta);
  return result;
}

struct ThresholdRow {
  double b, c, f, a_star_closed_form, a_star_bisection, relative_difference;
};

/// Closed-form a* against the spectrum bisection for each headway; writes threshold.csv.
inline std::vector<ThresholdRow> cmd_threshold(const ExperimentConfig& cfg,
                                               const std::vector<double>& b_grid) {
  const auto dir = detail::prepare_output_dir(cfg.output_dir);
  const auto ov = cfg.ov_function();
  std::vector<ThresholdRow> rows;
  for (double b : b_grid) {
    const auto eq = equilibrium_info(ov, b);
    const double bis = infinite_ring_threshold(eq);
    rows.push_back({b, eq.c, eq.f, eq.a_star, bis, std::abs(bis - eq.a_star) / eq.a_star});
  }
  CsvWriter w((dir / "threshold.csv").string());
  w.field("b").field("c").field("f").field("a_star_closed_form").field("a_star_bisection")
      .field("relative_difference").end_row();
  for (const auto& r : rows) {
    w.field(r.b).field(r.c).field(r.f).field(r.a_star_closed_form).field(r.a_star_bisection)
        .field(r.relative_difference).end_row();
  }
  w.close();
  return rows;
}

struct JerkRow {
  double v, accel_ovm, accel_hybrid, alpha_eff, jerk_ovm, jerk_hybrid;
};

/// Velocity grid v_min + i * v_step up to v_max (inclusive).
inline std::vector<double> jerk_velocity_grid(const JerkParams& p) {
  if (!(p.v_step > 0.0) || !(p.v_max >= p.v_min)) throw ConfigError("invalid jerk velocity grid");
  std::vector<double> grid;
  const auto count = static_cast<std::size_t>(std::floor((p.v_max - p.v_min) / p.v_step + 1e-9));
  for (std::size_t i = 0; i <= count; ++i) grid.push_back(p.v_min + static_cast<double>(i) * p.v_step);
  return grid;
}

/// OVM and hybrid acceleration, effective sensitivity and jerk at fixed V; writes jerk.csv.
inline std::vector<JerkRow> cmd_jerk_profile(const ExperimentConfig& cfg,
                                             const std::vector<double>& v_grid) {
  const auto& p = cfg.jerk;
  if (!(p.v_des > 0.0)) throw ConfigError("jerk.v_des must be positive");
  const auto dir = detail::prepare_output_dir(cfg.output_dir);
  const auto hybrid = ModelLaw::hybrid_ovd(p.a);
  const auto ovm = ModelLaw::classical_ovm(p.alpha ? *p.alpha : 2.0 * p.a / p.v_des);
  std::vector<JerkRow> rows;
  for (double v : v_grid) {
    rows.push_back({v, ovm.accel(v, p.v_des), hybrid.accel(v, p.v_des),
                    hybrid.effective_sensitivity(v, p.v_des), ovm.jerk(v, p.v_des),
                    hybrid.jerk(v, p.v_des)});
  }
  CsvWriter w((dir / "jerk.csv").string());
  w.field("v").field("accel_ovm").field("accel_hybrid").field("alpha_eff").field("jerk_ovm")
      .field("jerk_hybrid").end_row();
  for (const auto& r : rows) {
    w.field(r.v).field(r.accel_ovm).field(r.accel_hybrid).field(r.alpha_eff).field(r.jerk_ovm)
        .field(r.jerk_hybrid).end_row();
  }
  w.close();
  return rows;
}

struct SweepCell {
  double b = 0.0;
  double a_ratio = 0.0;
  double a = 0.0;
  double a_star = 0.0;
  Stability classification = Stability::Neutral;
  double max_re_lambda = 0.0;
  std::size_t fastest_mode = 0;
  /// A_m(T) / A_m(0) for the fastest linear mode m.
  double amplitude_ratio = std::nan("");
  std::string status = "ok";
};

/// Analytic and simulated stability of one (b, a/a*) cell. Never throws;
/// failures are reported in `status`.
inline SweepCell evaluate_sweep_cell(const ExperimentConfig& base, double b, double a_ratio) {
  SweepCell cell;
  cell.b = b;
  cell.a_ratio = a_ratio;
  try {
    ExperimentConfig cfg = base;
    cfg.model.kind = ModelLaw::Kind::HybridOvd;
    cfg.model.a.reset();
    cfg.model.a_ratio = a_ratio;
    cfg.ring.ring_length = b * static_cast<double>(cfg.ring.n_vehicles);
    cfg.validate();

    const auto eq = cfg.equilibrium();
    cell.a_star = eq.a_star;
    cell.a = cfg.hybrid_a();
    cell.classification = classify(cell.a, eq);
    const auto spectrum = full_spectrum(cell.a, eq, cfg.ring.n_vehicles);
    cell.max_re_lambda = max_real_part(spectrum);
    cell.fastest_mode = fastest_mode(spectrum);

    const auto rec = run(cfg.initial_state(), cfg.law(), cfg.ov_function(), cfg.ring, cfg.plan);
    const std::size_t mode = cell.fastest_mode;
    const auto y = deviations(rec, eq);
    const double first = mode_amplitude(y.row(0), static_cast<std::int64_t>(mode));
    const double last = mode_amplitude(y.row(y.rows() - 1), static_cast<std::int64_t>(mode));
    if (!(first > 0.0)) {
      cell.status = "no-initial-amplitude";
    } else {
      cell.amplitude_ratio = last / first;
      if (rec.meta.collision) cell.status = "collision";
    }
  } catch (const IntegrationDiverged& e) {
    cell.status = "diverged@" + std::to_string(e.step());
  } catch (const std::exception& e) {
    cell.status = std::string("error: ") + e.what();
  }
  return cell;
}

/// Phase-diagram sweep over b (outer) and a/a* (inner); writes sweep.csv.
inline std::vector<SweepCell> cmd_sweep(const ExperimentConfig& cfg, const std::vector<double>& a_ratios,
                                        const std::vector<double>& b_values) {
  if (a_ratios.empty() || b_values.empty()) throw ConfigError("sweep grids must be nonempty");
  const auto dir = detail::prepare_output_dir(cfg.output_dir);

  std::vector<std::pair<double, double>> grid;
  for (double b : b_values) {
    for (double r : a_ratios) grid.emplace_back(b, r);
  }
  std::vector<SweepCell> cells;
  cells.reserve(grid.size());
  const std::size_t width =
      cfg.sweep.parallel ? std::max<std::size_t>(1, std::thread::hardware_concurrency()) : 1;
  for (std::size_t start = 0; start < grid.size(); start += width) {
    const std::size_t stop = std::min(grid.size(), start + width);
    std::vector<std::future<SweepCell>> batch;
    for (std::size_t i = start; i < stop; ++i) {
      batch.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred,
                                 evaluate_sweep_cell, std::cref(cfg), grid[i].first, grid[i].second));
    }
    for (auto& f : batch) cells.push_back(f.get());
  }

  CsvWriter w((dir / "sweep.csv").string());
  w.field("b").field("a_ratio").field("a").field("a_star").field("classification")
      .field("max_re_lambda").field("fastest_mode").field("amplitude_ratio").field("status").end_row();
  for (const auto& c : cells) {
    std::string status = c.status;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    w.field(c.b).field(c.a_ratio).field(c.a).field(c.a_star).field(to_string(c.classification))
        .field(c.max_re_lambda).field(c.fastest_mode).field(c.amplitude_ratio).field(status).end_row();
  }
  w.close();
  return cells;
}

}  // namespace ovd
