#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lagcast/month.hpp"
#include "lagcast/panel.hpp"
#include "lagcast/pipeline.hpp"
#include "lagcast/simulate.hpp"

namespace lagcast {

// Flat `key = value` run configuration. Relative paths resolve against the
// directory of the config file.
struct RunConfig {
  std::optional<std::filesystem::path> cases;
  std::optional<std::filesystem::path> population;
  std::optional<std::filesystem::path> climate;

  bool simulate = false;  // true when any simulate.* key is present
  SimConfig sim;
  std::uint64_t sim_seed = 1;

  // Windows left unset default to: test = last `horizon` panel months,
  // train = first panel month up to the month before the test window.
  std::optional<MonthIndex> train_start;
  std::optional<MonthIndex> train_end;
  std::optional<MonthIndex> test_start;
  std::optional<MonthIndex> test_end;

  CantonSpec spec;  // windows here are placeholders until resolve_spec
  std::filesystem::path output = "lagcast_out";
  int threads = 0;  // 0 = LAGCAST_THREADS or hardware

  bool has_data_paths() const noexcept { return cases || population || climate; }
  // Throws Error(ConstraintViolation).
  void validate() const;
};

// Errors: ParseError (line number), UnknownKey, ConstraintViolation,
// MissingFile (referenced data file absent).
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {},
                       std::string_view source = "<memory>");
RunConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const RunConfig& config);

// Fills the train/test windows against the panel's month range and checks
// they are contiguous and inside the panel. Errors: ConstraintViolation.
CantonSpec resolve_spec(const RunConfig& config, const MonthlyPanel& panel);

}  // namespace lagcast
