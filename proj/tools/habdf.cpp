// Command-line front end for the fusion library; see --help for the subcommands.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "habdf/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace habdf::cli;

  CLI::App app{"Hierarchical adaptive Bayesian fusion of redundant bounding-box detectors"};
  app.require_subcommand(1);

  SimulateOptions sim;
  std::string sim_config, sim_out, sim_summary;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "run a fault-injection simulation scenario");
  simulate->add_option("--config,-c", sim_config, "scenario file")->required();
  simulate->add_option("--out,-o", sim_out, "per-frame CSV")->required();
  simulate->add_option("--summary", sim_summary, "summary CSV (default <out>.summary.csv)");
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "override the scenario seed");

  FuseOptions fuse;
  std::string fuse_tracks_path, fuse_config, fuse_out, fuse_weights;
  auto* fuse_cmd = app.add_subcommand("fuse", "fuse a recorded track log");
  fuse_cmd->add_option("--tracks,-t", fuse_tracks_path, "track CSV (frame,detector_id,u,v,h,w,valid)")
      ->required();
  fuse_cmd->add_option("--config,-c", fuse_config, "config file (defaults when omitted)");
  fuse_cmd->add_option("--out,-o", fuse_out, "fused track CSV")->required();
  fuse_cmd->add_option("--weights", fuse_weights, "per-frame weights CSV (default <out>.weights.csv)");

  EvalOptions eval;
  std::vector<std::string> eval_inputs;
  std::string eval_gt, eval_out, eval_summary;
  auto* eval_cmd = app.add_subcommand("eval", "score tracks against ground truth");
  eval_cmd->add_option("--fused,-f", eval_inputs, "fused or track CSV (repeatable)")->required();
  eval_cmd->add_option("--gt,-g", eval_gt, "ground-truth CSV (frame,u,v,h,w)")->required();
  eval_cmd->add_option("--out,-o", eval_out, "per-frame evaluation CSV")->required();
  eval_cmd->add_option("--summary", eval_summary, "summary CSV (default <out>.summary.csv)");

  SweepOptions sweep;
  std::string sweep_config, sweep_out;
  std::uint64_t sweep_seed = 0;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a scenario over a parameter grid");
  sweep_cmd->add_option("--config,-c", sweep_config, "scenario file")->required();
  sweep_cmd->add_option("--grid,-g", sweep.grid, "grid file or inline 'key=a|b;key2=c|d'")
      ->required();
  sweep_cmd->add_option("--out,-o", sweep_out, "one summary row per cell")->required();
  auto* sweep_seed_opt = sweep_cmd->add_option("--seed", sweep_seed, "override the scenario seed");
  sweep_cmd->add_flag("--force", sweep.force, "allow grids above 10000 cells");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (simulate->parsed()) {
    sim.config = sim_config;
    sim.out = sim_out;
    sim.summary = sim_summary;
    if (sim_seed_opt->count() > 0) sim.seed = sim_seed;
    return cmd_simulate(sim, std::cout, std::cerr);
  }
  if (fuse_cmd->parsed()) {
    fuse.tracks = fuse_tracks_path;
    fuse.config = fuse_config;
    fuse.out = fuse_out;
    fuse.weights = fuse_weights;
    return cmd_fuse(fuse, std::cout, std::cerr);
  }
  if (eval_cmd->parsed()) {
    for (const auto& p : eval_inputs) eval.inputs.emplace_back(p);
    eval.gt = eval_gt;
    eval.out = eval_out;
    eval.summary = eval_summary;
    return cmd_eval(eval, std::cout, std::cerr);
  }
  sweep.config = sweep_config;
  sweep.out = sweep_out;
  if (sweep_seed_opt->count() > 0) sweep.seed = sweep_seed;
  return cmd_sweep(sweep, std::cout, std::cerr);
}
