// Stand-in scorer speaking the JSONL protocol on stdin/stdout. Tokens are
// whitespace words with the final period split off; each token's logprob is
// -(1 + 0.1 * length), and passives ("was" present) pay an extra -2 on the
// participle slot so drops are positive and differ by verb length.
//
//   mock_scorer [--model NAME] [--error-id ID] [--skip-id ID] [--positive-id ID] [--exit CODE]

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

int main(int argc, char** argv) {
    std::string model = "mock-lm", error_id, skip_id, positive_id;
    int exit_code = 0;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i], value = argv[i + 1];
        if (flag == "--model") model = value;
        else if (flag == "--error-id") error_id = value;
        else if (flag == "--skip-id") skip_id = value;
        else if (flag == "--positive-id") positive_id = value;
        else if (flag == "--exit") exit_code = std::stoi(value);
    }
    std::string line;
    while (std::getline(std::cin, line)) {
        if (line.empty()) continue;
        const auto req = nlohmann::json::parse(line);
        const std::string id = req.at("id"), text = req.at("text");
        if (id == skip_id) continue;
        if (id == error_id || text.empty()) {
            std::cout << nlohmann::json{{"id", id}, {"error", "mock failure"}}.dump() << '\n';
            continue;
        }
        std::vector<std::string> tokens;
        std::istringstream words(text);
        std::string w;
        while (words >> w) {
            if (w.size() > 1 && w.back() == '.') {
                tokens.push_back(w.substr(0, w.size() - 1));
                tokens.push_back(".");
            } else {
                tokens.push_back(w);
            }
        }
        std::vector<double> lps;
        bool after_was = false;
        for (const auto& t : tokens) {
            double lp = -(1.0 + 0.1 * static_cast<double>(t.size()));
            if (after_was) lp -= 2.0;
            after_was = t == "was";
            lps.push_back(lp);
        }
        if (id == positive_id) lps[0] = 0.5;
        std::cout << nlohmann::json{{"id", id}, {"tokens", tokens}, {"logprobs", lps}, {"model_name", model}}.dump()
                  << '\n';
    }
    return exit_code;
}
