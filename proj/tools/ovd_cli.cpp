// ovd: ring-road experiments for the optimal-velocity and hybrid drag laws.
//
//   ovd simulate --preset unstable_paper --out runs/unstable
//   ovd spectrum --preset stable_paper --out runs/spectrum
//   ovd threshold --b-grid 0.25,0.5,1,2,3
//   ovd jerk-profile --out runs/jerk
//   ovd sweep --a-ratios 0.5,1,2.2 --b-values 0.5,2

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ovd/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct Options {
  std::string config_path;
  std::string preset;
  std::string out;
  std::string scheme;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<double> dx;
  std::string modes;
  std::string b_grid;
  std::string a_ratios;
  std::string b_values;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "Key-value configuration file");
  cmd->add_option("--preset", o.preset, "stable_paper | unstable_paper | unstable_long");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--scheme", o.scheme, "euler | rk4");
  cmd->add_option("--dt", o.dt, "Time step");
  cmd->add_option("--t-end", o.t_end, "Time horizon");
  cmd->add_option("--dx", o.dx, "Absolute initial displacement of the perturbed vehicle");
  cmd->add_option("--modes", o.modes, "Comma-separated Fourier mode indices");
}

ovd::ExperimentConfig build_config(const Options& o) {
  ovd::KeyValues kv;
  if (!o.config_path.empty()) kv = ovd::read_key_value_file(o.config_path);
  std::optional<ovd::Preset> preset;
  if (!o.preset.empty()) preset = ovd::parse_preset(o.preset);
  auto cfg = ovd::load_config(kv, preset);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.scheme.empty()) cfg.plan.scheme = ovd::parse_scheme(o.scheme);
  if (o.dt) cfg.plan.dt = *o.dt;
  if (o.t_end) cfg.plan.t_end = *o.t_end;
  if (o.dx) cfg.perturbation.dx = *o.dx;
  if (!o.modes.empty()) cfg.modes = ovd::parse_count_list(o.modes, "--modes");
  if (!o.b_grid.empty()) cfg.threshold_b_grid = ovd::parse_double_list(o.b_grid, "--b-grid");
  if (!o.a_ratios.empty()) cfg.sweep.a_ratios = ovd::parse_double_list(o.a_ratios, "--a-ratios");
  if (!o.b_values.empty()) cfg.sweep.b_values = ovd::parse_double_list(o.b_values, "--b-values");
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ring-road simulation and stability analysis for OVM-type car-following laws"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Integrate the ring and write trajectories, velocities, Fourier amplitudes");
  auto* spectrum = app.add_subcommand("spectrum", "Dispersion-relation eigenvalues for every ring mode");
  auto* threshold = app.add_subcommand("threshold", "Closed-form vs bisected stability threshold over headways");
  auto* jerk = app.add_subcommand("jerk-profile", "Acceleration, effective sensitivity and jerk versus speed");
  auto* sweep = app.add_subcommand("sweep", "Analytic and simulated stability over a (b, a/a*) grid");
  for (auto* cmd : {simulate, spectrum, threshold, jerk, sweep}) add_common(cmd, o);
  threshold->add_option("--b-grid", o.b_grid, "Comma-separated headways");
  sweep->add_option("--a-ratios", o.a_ratios, "Comma-separated a/a* values");
  sweep->add_option("--b-values", o.b_values, "Comma-separated headways");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    const auto cfg = build_config(o);
    if (simulate->parsed()) {
      const auto r = ovd::cmd_simulate(cfg);
      std::printf("%s: a/a* = %s, min velocity %s -> %s\n",
                  r.meta["stability"]["classification"].get<std::string>().c_str(),
                  ovd::format_double(r.meta["stability"].value("a_over_a_star", 0.0)).c_str(),
                  ovd::format_double(r.record.meta.min_velocity).c_str(), cfg.output_dir.c_str());
    } else if (spectrum->parsed()) {
      const auto r = ovd::cmd_spectrum(cfg);
      std::printf("%s: max Re lambda = %s -> %s\n",
                  r.meta["stability"]["classification"].get<std::string>().c_str(),
                  ovd::format_double(r.meta["stability"]["max_re_lambda"].get<double>()).c_str(),
                  cfg.output_dir.c_str());
    } else if (threshold->parsed()) {
      for (const auto& row : ovd::cmd_threshold(cfg, cfg.threshold_b_grid)) {
        std::printf("b = %s  a* = %s  bisection = %s  rel diff = %s\n", ovd::format_double(row.b).c_str(),
                    ovd::format_double(row.a_star_closed_form).c_str(),
                    ovd::format_double(row.a_star_bisection).c_str(),
                    ovd::format_double(row.relative_difference).c_str());
      }
    } else if (jerk->parsed()) {
      const auto rows = ovd::cmd_jerk_profile(cfg, ovd::jerk_velocity_grid(cfg.jerk));
      std::printf("%zu rows -> %s/jerk.csv\n", rows.size(), cfg.output_dir.c_str());
    } else if (sweep->parsed()) {
      for (const auto& c : ovd::cmd_sweep(cfg, cfg.sweep.a_ratios, cfg.sweep.b_values)) {
        std::printf("b = %-6s a/a* = %-6s %-8s amplitude ratio %s [%s]\n", ovd::format_double(c.b).c_str(),
                    ovd::format_double(c.a_ratio).c_str(), ovd::to_string(c.classification).c_str(),
                    ovd::format_double(c.amplitude_ratio).c_str(), c.status.c_str());
      }
    }
  } catch (const ovd::IntegrationDiverged& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDiverged;
  } catch (const ovd::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ovd::DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  }
  return 0;
}
