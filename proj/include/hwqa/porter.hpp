#pragma once

#include <string>
#include <string_view>

namespace hwqa::porter {

// Porter (1980) suffix-stripping stemmer, original rule set.
// Input is expected to be lowercase ASCII; words of length <= 2 are returned
// unchanged.
std::string stem(std::string_view word);

}  // namespace hwqa::porter
