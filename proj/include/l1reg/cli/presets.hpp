#pragma once

// Bundled run configurations, one per reference study. Each preset is a
// complete config document that can be dumped, edited and fed back in.

#include <string>
#include <vector>

#include "l1reg/cli/config.hpp"

namespace l1reg::cli {

struct Preset {
  std::string name;
  std::string description;
  json config;

  /// "solve", "rates" or "analyze".
  std::string command() const;
  /// Analysis name for analyze presets, empty otherwise.
  std::string analysis() const;
};

const std::vector<Preset>& bundled_presets();

/// Throws InvalidArgument listing the known names when `name` is not bundled.
const Preset& find_preset(const std::string& name);

}  // namespace l1reg::cli
