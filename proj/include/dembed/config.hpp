#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dembed/boxcover.hpp"
#include "dembed/dde.hpp"
#include "dembed/embedding.hpp"
#include "dembed/subdivision.hpp"

namespace dembed {

/// INI-style text: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Sections may repeat (e.g. one `[observable]` per observable).
struct IniSection {
  std::string name;
  std::size_t line = 0;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(const std::string& key) const;
};

struct IniDocument {
  std::vector<IniSection> sections;

  static IniDocument parse(std::istream& is);
  std::vector<const IniSection*> all(const std::string& name) const;
  const IniSection* first(const std::string& name) const;
};

struct SimulateSettings {
  double transient = 200.0;
  std::size_t samples = 500;
  double spacing = 0.0;                // 0: one omega
  std::vector<double> initial;         // constant initial history; empty: preset default
};

/// Everything a run needs, resolved from a config file. Exactly one of
/// `system` (delay equation) or `synthetic` (explicit map) is set.
struct RunSetup {
  std::string source;  // config text, echoed into the manifest
  std::string system_label;
  std::optional<DdeSystem> system;
  std::optional<EmbeddingConfig> embedding;
  std::optional<ExplicitMap> synthetic;
  std::size_t k = 0;
  BoxRegion domain;
  std::vector<BoxRegion> excluded;
  RunConfig run;
  std::size_t steps_per_delay = 0;
  std::size_t checkpoint_every = 0;  // 0: final covering only
  std::size_t checkpoint_from = 0;
  std::string output_dir = "out";
  bool write_checkpoints = true;
  SimulateSettings simulate;
  std::vector<std::vector<double>> equilibria;
};

/// Throws Error(ConfigError) with the offending key or line.
RunSetup parse_config(std::istream& is);
RunSetup load_config(const std::string& path);

/// Explicit maps available to `[system] synthetic = ...`:
/// identity, constant, contraction, hyperbolic, rotation.
ExplicitMap synthetic_map(const std::string& name, std::size_t k, const IniSection& params);

}  // namespace dembed
