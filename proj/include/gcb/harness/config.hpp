#pragma once

#include <filesystem>
#include <string>

#include "gcb/harness/experiment.hpp"

namespace gcb::harness {

/// Parses a YAML experiment description. Missing keys keep their defaults;
/// unknown keys, wrong types and out-of-range values throw ConfigInvalid
/// naming the field path (e.g. "scm.prior.sd_ratio").
///
///   scm:    family, d, L, width, mode, lipschitz, output_bound,
///           interval_space, grid_resolution, noise {variance, mean},
///           prior {mean, mean_bar, sd_ratio, sd, active}
///   agent:  kind, delta, ridge, candidates, rollouts, posterior_scale,
///           beta_scale, constant_arm, sgd {epochs, step_size, batch_size, warm_start}
///   run:    horizon, replicates, seed, oracle_rollouts, workers
///   sweep:  T, d, L, agent (lists; nonempty when present)
///   output: dir, plots, overlay
ExperimentConfig parse_config(const std::string& yaml_text);
/// Throws IoError when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of every field that affects results, keys sorted, numbers
/// in shortest round-trip form. The base seed, worker count and output
/// settings are left out: the seed is its own CSV column.
std::string canonical_json(const ExperimentConfig& cfg);
/// The same fields as YAML that parse_config reads back to an equal config.
std::string to_yaml(const ExperimentConfig& cfg);
/// Lowercase hex SHA-256 of canonical_json(cfg).
std::string config_hash(const ExperimentConfig& cfg);

Family parse_family(const std::string& s);
AgentKind parse_agent(const std::string& s);

}  // namespace gcb::harness
