#pragma once

#include <functional>
#include <string_view>

namespace rebound {

using WarningSink = std::function<void(std::string_view)>;

/// Replaces the warning sink (default writes to stderr). Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

} // namespace rebound
