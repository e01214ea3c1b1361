#pragma once

#include <string_view>

namespace gattaca::testing {

/// Three nodes: an input x1 and a two-node feedback loop.
inline constexpr std::string_view kThreeNodeModel =
    "targets, factors\n"
    "x1, x1\n"
    "x2, x1 | x3\n"
    "x3, x2 & x3\n";

/// Two inputs selecting between two regimes of x3/x4; x5 is the readout.
inline constexpr std::string_view kSwitchModel =
    "targets, factors\n"
    "x1, x1\n"
    "x2, x2\n"
    "x3, (!x1 & x4) | (x1 & x2 & !x4)\n"
    "x4, (!x1 & x3) | (x1 & x2 & !x3)\n"
    "x5, x1 & (!x2 | x3)\n";

}  // namespace gattaca::testing
