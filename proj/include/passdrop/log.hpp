#pragma once

#include <functional>
#include <string_view>

namespace passdrop {

using WarningSink = std::function<void(std::string_view)>;

// Non-fatal diagnostics go through one process-wide sink (stderr by default).
void warn(std::string_view message);

// Installs `sink` and returns the previous one. An empty sink restores stderr.
WarningSink set_warning_sink(WarningSink sink);

} // namespace passdrop
