#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gcb/harness/experiment.hpp"

namespace gcb::harness {

/// One configuration of a run or sweep, with everything needed to write it out.
struct PointResult {
  ExperimentConfig cfg;
  std::string hash;
  std::vector<RegretTrace> traces;
  SummaryPoint summary;
};

/// Header plus one row per (replicate, round):
/// config_hash,seed,replicate,t,a_vec,reward,inst_regret,cum_regret
/// Reals use %.17g; a_vec joins the intervention values with ';'.
void write_traces_csv(std::ostream& out, const std::string& hash, const std::vector<RegretTrace>& traces,
                      bool header = true);
void write_summary_csv(std::ostream& out, const std::vector<PointResult>& points);

/// Cumulative regret against t with a 1-SE band per point. Points run with a
/// gcb agent also get the bound curves, rescaled to meet the empirical R(T) so
/// only their shape is compared.
void plot_regret_svg(const std::filesystem::path& path, const std::vector<PointResult>& points);
/// R(T) with 1-SE error bars against d or L, one series per agent.
enum class ScalingAxis { D, L };
void plot_scaling_svg(const std::filesystem::path& path, const std::vector<PointResult>& points, ScalingAxis axis);

/// Expands the sweep lists (empty means the base value) into configurations,
/// in T-major, then d, L, agent order.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& base);

struct RunSummary {
  std::vector<PointResult> points;
  /// True when request_stop() cut the run short.
  bool interrupted = false;
  std::filesystem::path out_dir;
};

/// Runs every configuration of the sweep (a single point when no sweep lists
/// are set) and writes under cfg.out_dir:
///   config.yaml   the configuration as run
///   traces.csv    per-round rows of every point
///   summary.csv   one row per point
///   regret.svg, regret_vs_d.svg, regret_vs_L.svg   when plots are enabled
/// On interruption the completed replicates are still written.
RunSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace gcb::harness
