#pragma once

#include <string>
#include <utility>
#include <vector>

#include "moddisc/modsig.hpp"

namespace moddisc {

/// Stacked line plots, one 800 x 200 panel per signal: value 0..1 on the
/// vertical axis, seconds on the horizontal. Output is deterministic.
/// Throws ConfigError when `curves` is empty.
std::string plot_svg(const std::vector<std::pair<std::string, ModSignal>>& curves);

}  // namespace moddisc
