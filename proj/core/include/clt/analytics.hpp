#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clt/composition.hpp"

namespace clt {

inline constexpr double kDefaultSpikeThreshold = 0.8;
inline constexpr int kDefaultCoincidenceWindow = 3;

struct SpikeEvent {
  std::int64_t step = 0;
  LoadComponent component = LoadComponent::kExtraneous;
  double value = 0.0;
  double threshold = 0.0;

  bool operator==(const SpikeEvent&) const = default;
};

// One event for every step whose component value strictly exceeds threshold.
std::vector<SpikeEvent> detect_spikes(std::span<const LoadPoint> points, LoadComponent component,
                                      double threshold);

struct CoincidenceCount {
  std::size_t errors = 0;
  std::size_t coincident = 0;

  CoincidenceCount& operator+=(const CoincidenceCount& o) {
    errors += o.errors;
    coincident += o.coincident;
    return *this;
  }
  // Empty when there were no errors to explain.
  std::optional<double> fraction() const;
};

// Counts error steps t with an EL spike anywhere in [t - window, t].
CoincidenceCount count_error_spike_coincidence(std::span<const LoadPoint> points,
                                               const std::vector<bool>& labels, double threshold,
                                               int window);

std::optional<double> error_spike_coincidence(std::span<const LoadPoint> points,
                                              const std::vector<bool>& labels,
                                              double threshold = kDefaultSpikeThreshold,
                                              int window = kDefaultCoincidenceWindow);

// Point-biserial correlation between CLI and the labels.
double cli_error_correlation(std::span<const LoadPoint> points, const std::vector<bool>& labels);

struct ClusterModel {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::array<double, 3>> centroids;  // (il, el, gl)
  std::vector<int> assignments;
  std::vector<double> inertia_history;  // one entry per Lloyd assignment pass
  int iterations = 0;
  int empty_repairs = 0;

  bool operator==(const ClusterModel&) const = default;
};

inline constexpr int kMaxLloydIterations = 100;
inline constexpr double kInertiaTolerance = 1e-6;

// k-means over (il, el, gl) with seeded farthest-first initialization.
ClusterModel cluster_strategies(std::span<const LoadPoint> points, int k, std::uint64_t seed);

// Same algorithm over arbitrary 3-d points.
ClusterModel kmeans3(std::span<const std::array<double, 3>> points, int k, std::uint64_t seed);

struct ComponentSummary {
  double mean = 0.0;
  double max = 0.0;
  std::int64_t argmax_step = 0;
  std::size_t spikes = 0;  // values above the summary threshold

  bool operator==(const ComponentSummary&) const = default;
};

struct TraceSummary {
  std::size_t steps = 0;
  double spike_threshold = kDefaultSpikeThreshold;
  std::array<ComponentSummary, 4> components{};  // IL, EL, GL, CLI
  ProxyVector normalized_means;                  // radar axes
  ProxyVector raw_means;

  const ComponentSummary& operator[](LoadComponent c) const {
    return components[static_cast<std::size_t>(c)];
  }
  bool operator==(const TraceSummary&) const = default;
};

TraceSummary trace_summary(std::span<const LoadPoint> points,
                           double spike_threshold = kDefaultSpikeThreshold);

std::string format_summary(const TraceSummary& summary);

}  // namespace clt
