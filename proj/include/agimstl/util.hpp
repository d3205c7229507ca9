#pragma once

#include <string>

namespace agim::detail {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

}  // namespace agim::detail
