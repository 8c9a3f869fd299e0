#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "clt/composition.hpp"
#include "clt/lgd.hpp"
#include "clt/synth.hpp"

namespace clt {

// All configs are single JSON documents. Readers throw IoFailure when the
// file cannot be opened and ConfigError on bad content.

struct WeightsFile {
  CompositionWeights cw;
  CliWeights w;
  std::optional<double> correlation;  // set by `fit`
};

WeightsFile read_weights(const std::filesystem::path& path);
void write_weights(const WeightsFile& weights, const std::filesystem::path& path);

NormStats read_norm_stats(const std::filesystem::path& path);
void write_norm_stats(const NormStats& stats, const std::filesystem::path& path);

// Fields absent from the file keep the values of the named "preset"
// (default: "default").
SynthConfig read_synth_config(const std::filesystem::path& path);
void write_synth_config(const SynthConfig& config, const std::filesystem::path& path);

LgdConfig read_lgd_config(const std::filesystem::path& path);
void write_lgd_config(const LgdConfig& config, const std::filesystem::path& path);

std::vector<Intervention> read_interventions(const std::filesystem::path& path);
void write_interventions(const std::vector<Intervention>& interventions,
                         const std::filesystem::path& path);

// Writes `text` verbatim; IoFailure on any stream error.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace clt
