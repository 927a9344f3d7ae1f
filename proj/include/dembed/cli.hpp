#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dembed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEmpty = 3;

const char* version();

struct RunOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> checkpoint_every;
};

struct SimulateOptions {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> transient;
  std::optional<std::size_t> samples;
  std::optional<double> spacing;
};

struct AnalyzeOptions {
  std::string covering;
  std::optional<std::string> points;
  std::optional<std::string> other;        // second covering, compared by box centers
  std::vector<std::string> series;         // extra coverings for the dimension estimate
  std::optional<std::size_t> slice_coord;  // 1-based
  double slice_value = 0.0;
  double slice_thickness = 0.0;
  std::optional<std::string> out;          // report path; stdout when unset
};

/// Writes covering checkpoints, covering.txt, report.txt, report.kv,
/// timing.kv and manifest.txt into the output directory.
int cmd_run(const RunOptions& opt, std::ostream& log);
/// Writes trajectory.txt (dense solution over the sampled window) and
/// orbit.txt (embedded samples labelled by time).
int cmd_simulate(const SimulateOptions& opt, std::ostream& log);
int cmd_analyze(const AnalyzeOptions& opt, std::ostream& out, std::ostream& log);
int cmd_presets(std::ostream& out);

int main(int argc, char** argv);

}  // namespace dembed::cli
