#include "passdrop/scorer_client.hpp"

#include "passdrop/errors.hpp"

#include <cstdio>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "httplib.h"

namespace passdrop::protocol {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

} // namespace

std::vector<ScoreResponse> run_subprocess_scorer(const std::string& command,
                                                 const std::filesystem::path& requests_file) {
    const std::string full = fmt::format("{} < {}", command, shell_quote(requests_file.string()));
    FILE* pipe = ::popen(full.c_str(), "r");
    if (!pipe) throw IoError(fmt::format("cannot start scorer '{}'", command));
    std::string output;
    char buf[1 << 16];
    std::size_t got = 0;
    while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, got);
    const int status = ::pclose(pipe);
    if (status != 0) throw IoError(fmt::format("scorer '{}' exited with status {}", command, status));
    std::istringstream in(output);
    return read_responses(in);
}

std::vector<ScoreResponse> run_http_scorer(const std::string& url, std::span<const ScoreRequest> requests) {
    if (!is_http_endpoint(url)) throw IoError(fmt::format("unsupported scorer endpoint '{}'", url));
    const auto rest = url.substr(7);
    const auto slash = rest.find('/');
    const std::string host_port = rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/score" : rest.substr(slash);
    if (path == "/") path = "/score";

    httplib::Client client("http://" + host_port);
    client.set_read_timeout(600, 0);
    auto res = client.Post(path.c_str(), requests_to_json_array(requests), "application/json");
    if (!res) throw IoError(fmt::format("scorer endpoint '{}' unreachable: {}", url, httplib::to_string(res.error())));
    if (res->status != 200) throw IoError(fmt::format("scorer endpoint '{}' returned HTTP {}", url, res->status));
    return responses_from_json_array(res->body);
}

} // namespace passdrop::protocol
