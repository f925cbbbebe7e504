#include "passdrop/protocol.hpp"

#include "passdrop/errors.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "json.hpp"

namespace passdrop::protocol {

using nlohmann::json;

namespace {

std::string require_string(const json& j, const char* key, std::string_view what) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw ProtocolError(fmt::format("{}: missing string field '{}'", what, key));
    return it->get<std::string>();
}

json parse_object(std::string_view line, std::string_view what) {
    json j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError(fmt::format("{}: not a JSON object", what));
    return j;
}

ScoreResponse response_from_json(const json& j) {
    ScoreResponse r;
    r.id = require_string(j, "id", "score response");
    const auto what = fmt::format("score response '{}'", r.id);
    if (auto e = j.find("error"); e != j.end() && !e->is_null()) {
        r.error = e->is_string() ? e->get<std::string>() : e->dump();
        return r;
    }
    r.model_name = require_string(j, "model_name", what);
    auto tokens = j.find("tokens");
    auto logprobs = j.find("logprobs");
    if (tokens == j.end() || !tokens->is_array()) throw ProtocolError(what + ": missing array 'tokens'");
    if (logprobs == j.end() || !logprobs->is_array()) throw ProtocolError(what + ": missing array 'logprobs'");
    if (tokens->size() != logprobs->size())
        throw ProtocolError(fmt::format("{}: {} tokens but {} logprobs", what, tokens->size(), logprobs->size()));
    for (const auto& t : *tokens) {
        if (!t.is_string()) throw ProtocolError(what + ": non-string token");
        r.tokens.push_back(t.get<std::string>());
    }
    for (const auto& v : *logprobs) {
        if (!v.is_number()) throw ProtocolError(what + ": non-numeric logprob");
        const double lp = v.get<double>();
        if (!std::isfinite(lp) || lp > kPositiveLogprobSlack)
            throw ProtocolError(fmt::format("{}: invalid logprob {}", what, lp));
        r.logprobs.push_back(lp);
    }
    return r;
}

json response_to_json(const ScoreResponse& r) {
    if (r.error) return json{{"id", r.id}, {"error", *r.error}};
    return json{{"id", r.id}, {"tokens", r.tokens}, {"logprobs", r.logprobs}, {"model_name", r.model_name}};
}

} // namespace

std::string request_id(std::string_view pair_id, Voice voice) { return fmt::format("{}/{}", pair_id, to_string(voice)); }

std::pair<std::string, Voice> parse_request_id(std::string_view id) {
    const auto slash = id.rfind('/');
    if (slash == std::string_view::npos || slash == 0) throw ProtocolError(fmt::format("malformed request id '{}'", id));
    try {
        return {std::string(id.substr(0, slash)), parse_voice(id.substr(slash + 1))};
    } catch (const FormatError&) {
        throw ProtocolError(fmt::format("malformed request id '{}'", id));
    }
}

std::vector<ScoreRequest> make_requests(std::span<const SentencePair> pairs) {
    std::vector<ScoreRequest> out;
    out.reserve(pairs.size() * 2);
    for (const auto& p : pairs)
        for (Voice v : {Voice::active, Voice::passive}) out.push_back({request_id(p.pair_id, v), p.text(v)});
    return out;
}

std::string to_json_line(const ScoreRequest& r) { return json{{"id", r.id}, {"text", r.text}}.dump(); }

std::string to_json_line(const ScoreResponse& r) { return response_to_json(r).dump(); }

ScoreRequest parse_request_line(std::string_view line) {
    const json j = parse_object(line, "score request");
    ScoreRequest r{require_string(j, "id", "score request"), require_string(j, "text", "score request")};
    if (r.text.empty()) throw ProtocolError(fmt::format("score request '{}': empty text", r.id));
    return r;
}

ScoreResponse parse_response_line(std::string_view line) { return response_from_json(parse_object(line, "score response")); }

void write_requests(std::ostream& os, std::span<const ScoreRequest> requests) {
    for (const auto& r : requests) os << to_json_line(r) << '\n';
}

std::vector<ScoreRequest> read_requests(std::istream& is) {
    std::vector<ScoreRequest> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_request_line(line));
        } catch (const ProtocolError& e) {
            throw ProtocolError(fmt::format("request line {}: {}", n, e.what()));
        }
    }
    return out;
}

std::vector<ScoreResponse> read_responses(std::istream& is) {
    std::vector<ScoreResponse> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(parse_response_line(line));
        } catch (const ProtocolError& e) {
            throw ProtocolError(fmt::format("response line {}: {}", n, e.what()));
        }
    }
    return out;
}

std::string requests_to_json_array(std::span<const ScoreRequest> requests) {
    json arr = json::array();
    for (const auto& r : requests) arr.push_back({{"id", r.id}, {"text", r.text}});
    return arr.dump();
}

std::vector<ScoreResponse> responses_from_json_array(std::string_view body) {
    json j = json::parse(body.begin(), body.end(), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw ProtocolError("scorer endpoint did not return a JSON array");
    std::vector<ScoreResponse> out;
    for (const auto& item : j) {
        if (!item.is_object()) throw ProtocolError("scorer endpoint returned a non-object element");
        out.push_back(response_from_json(item));
    }
    return out;
}

std::vector<SentenceScore> to_sentence_scores(std::span<const ScoreRequest> requests,
                                              std::span<const ScoreResponse> responses) {
    std::map<std::string, const ScoreResponse*> by_id;
    std::set<std::string> duplicated, unknown, errored;
    std::set<std::string> requested;
    for (const auto& r : requests) requested.insert(r.id);
    for (const auto& r : responses) {
        if (!requested.count(r.id)) {
            unknown.insert(r.id);
            continue;
        }
        if (!by_id.emplace(r.id, &r).second) duplicated.insert(r.id);
        if (r.error) errored.insert(fmt::format("{} ({})", r.id, *r.error));
    }
    std::vector<std::string> missing;
    std::vector<SentenceScore> out;
    for (const auto& req : requests) {
        auto it = by_id.find(req.id);
        if (it == by_id.end()) {
            missing.push_back(req.id);
            continue;
        }
        const ScoreResponse& r = *it->second;
        if (r.error) continue;
        auto [pair_id, voice] = parse_request_id(req.id);
        std::vector<TokenScore> tokens;
        tokens.reserve(r.tokens.size());
        for (std::size_t i = 0; i < r.tokens.size(); ++i) tokens.push_back({r.tokens[i], r.logprobs[i]});
        try {
            out.push_back(make_sentence_score(std::move(pair_id), voice, std::move(tokens), r.model_name));
        } catch (const ScoreError& e) {
            errored.insert(fmt::format("{} ({})", req.id, e.what()));
        }
    }
    if (!missing.empty() || !duplicated.empty() || !unknown.empty() || !errored.empty()) {
        std::string msg = "scorer responses do not match the requests";
        if (!missing.empty()) msg += fmt::format("; unanswered: {}", fmt::join(missing, ", "));
        if (!duplicated.empty()) msg += fmt::format("; duplicated: {}", fmt::join(duplicated, ", "));
        if (!unknown.empty()) msg += fmt::format("; unknown: {}", fmt::join(unknown, ", "));
        if (!errored.empty()) msg += fmt::format("; failed: {}", fmt::join(errored, ", "));
        throw ValidationError(msg);
    }
    return out;
}

} // namespace passdrop::protocol
