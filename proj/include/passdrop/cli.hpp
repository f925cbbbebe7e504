#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace passdrop::cli {

// Exit codes: 0 success, 1 I/O failure, 2 validation failure or bad usage.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitInvalid = 2;

// `args` excludes the program name. Subcommands: gen-stimuli, build-lists,
// score, ingest-ratings, corpus-count, analyze, report.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

} // namespace passdrop::cli
