#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fedlab/fedsim.hpp"

namespace fedlab {

// A parsed experiment document: the experiment itself plus runner-level
// settings that live in the file rather than the simulation config.
struct LoadedConfig {
    ExperimentConfig experiment;
    std::optional<std::string> out_dir;
};

/**
 * Parses a JSON experiment document. Every key is optional and falls back
 * to the ExperimentConfig default, so "{}" describes the reference task.
 * Keys are grouped into sections: federation, training, federated,
 * evolution, fitness, metrics, run.
 *
 * Throws ConfigError on syntax errors (message anchored to source_name and
 * line), on unrecognized or wrongly typed keys (message names the full key
 * path), and on values rejected by ExperimentConfig::validate().
 */
LoadedConfig parse_experiment_config(const std::string& text,
                                     const std::string& source_name);

// parse_experiment_config over the file's contents; IoError when unreadable.
LoadedConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace fedlab
