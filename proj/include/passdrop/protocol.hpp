#pragma once

// Scorer protocol: newline-delimited JSON records exchanged with an external
// language-model scorer, or a JSON array over HTTP POST /score.
//
//   request  {"id": "<pair_id>/<voice>", "text": "..."}
//   response {"id": "...", "tokens": [...], "logprobs": [...], "model_name": "..."}
//   error    {"id": "...", "error": "..."}

#include "passdrop/judgments.hpp"
#include "passdrop/stimuli.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace passdrop::protocol {

struct ScoreRequest {
    std::string id;
    std::string text;
};

struct ScoreResponse {
    std::string id;
    std::vector<std::string> tokens;
    std::vector<double> logprobs;
    std::string model_name;
    std::optional<std::string> error; // per-item failure reported by the scorer
};

std::string request_id(std::string_view pair_id, Voice voice);
// Splits "<pair_id>/<voice>"; throws ProtocolError on a malformed id.
std::pair<std::string, Voice> parse_request_id(std::string_view id);

// Both voices of every pair, in stimulus order.
std::vector<ScoreRequest> make_requests(std::span<const SentencePair> pairs);

std::string to_json_line(const ScoreRequest& r);
std::string to_json_line(const ScoreResponse& r);

// Throws ProtocolError on malformed JSON, missing fields, mismatched token and
// logprob counts, non-finite values, or logprobs above the positive slack.
ScoreRequest parse_request_line(std::string_view line);
ScoreResponse parse_response_line(std::string_view line);

void write_requests(std::ostream& os, std::span<const ScoreRequest> requests);
std::vector<ScoreRequest> read_requests(std::istream& is);
std::vector<ScoreResponse> read_responses(std::istream& is);

std::string requests_to_json_array(std::span<const ScoreRequest> requests);
std::vector<ScoreResponse> responses_from_json_array(std::string_view body);

// Matches responses to requests one-to-one. Throws ValidationError listing
// unanswered, duplicated, unknown, and errored ids.
std::vector<SentenceScore> to_sentence_scores(std::span<const ScoreRequest> requests,
                                              std::span<const ScoreResponse> responses);

} // namespace passdrop::protocol
