#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sdrc/filters.hpp"
#include "sdrc/gen_model.hpp"

namespace sdrc::cli {

enum ExitCode : int { ok = 0, usage_or_io = 1, numerical = 2 };

/// "white[:power]", "ar1:a[:power]", "ar2:a1:a2[:power]",
/// "powerlaw:exponent[:floor[:power]]" or "table:spectrum.csv".
[[nodiscard]] CauseSpec parse_cause(std::string_view text);

/// "spherical", "spherical-chi", "normal", "rademacher" or "uniform".
[[nodiscard]] CoefficientSampler parse_sampler(std::string_view text);

/// Entry point shared by the executable and the tests; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdrc::cli
