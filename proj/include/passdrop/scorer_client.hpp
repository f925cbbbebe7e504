#pragma once

#include "passdrop/protocol.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace passdrop::protocol {

// Runs `command` through the shell with `requests_file` on stdin and parses
// one response per stdout line. Throws IoError if it cannot start or exits non-zero.
std::vector<ScoreResponse> run_subprocess_scorer(const std::string& command,
                                                 const std::filesystem::path& requests_file);

// POSTs the batch as a JSON array to http://host[:port][/path] (path defaults to /score).
std::vector<ScoreResponse> run_http_scorer(const std::string& url, std::span<const ScoreRequest> requests);

inline bool is_http_endpoint(std::string_view scorer) { return scorer.starts_with("http://"); }

} // namespace passdrop::protocol
