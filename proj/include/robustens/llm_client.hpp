#pragma once

// Optional paraphrase generation through an external HTTP completion
// endpoint. POSTs {"prompt","n","temperature","max_tokens"} as JSON and
// accepts either {"outputs": [...]}, a bare JSON array, or newline-delimited
// plain text. Short responses are padded with the original (and counted).

#include <cstdlib>
#include <memory>
#include <semaphore>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "robustens/common.hpp"
#include "robustens/paraphrase.hpp"

namespace robustens {

namespace detail {

struct ParsedUrl {
    std::string base;  // scheme://host[:port]
    std::string path;
};

inline ParsedUrl parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("llm endpoint url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

class LlmClient {
public:
    explicit LlmClient(LlmEndpointConfig cfg)
        : cfg_(std::move(cfg)), slots_(cfg_.max_in_flight) {
        cfg_.validate();
    }

    // Blocking; safe to call from several threads, bounded by max_in_flight.
    ParaphraseSet generate(const std::string& text, std::size_t n, std::size_t* warnings = nullptr) const {
        if (n < 1) throw ValidationError("paraphrase count must be >= 1");
        if (trim(text).empty()) throw EmptyText();

        nlohmann::json body{{"prompt", build_prompt(text, n)},
                            {"n", n},
                            {"temperature", cfg_.temperature},
                            {"max_tokens", cfg_.max_tokens}};

        slots_.acquire();
        httplib::Result res = [&] {
            const auto parsed = detail::parse_url(cfg_.url);
            httplib::Client client(parsed.base);
            client.set_connection_timeout(cfg_.timeout_seconds);
            client.set_read_timeout(cfg_.timeout_seconds);
            httplib::Headers headers;
            if (const char* token = std::getenv(cfg_.token_env.c_str()); token && *token)
                headers.emplace("Authorization", std::string("Bearer ") + token);
            return client.Post(parsed.path, headers, body.dump(), "application/json");
        }();
        slots_.release();

        if (!res)
            throw EndpointUnreachable("llm endpoint unreachable: " + cfg_.url + " (" +
                                      httplib::to_string(res.error()) + ")");
        if (res->status < 200 || res->status >= 300)
            throw MalformedResponse("llm endpoint returned status " + std::to_string(res->status));

        std::vector<std::string> outputs = parse_outputs(res->body);
        ParaphraseSet set;
        set.original = text;
        set.provenance = Provenance::llm;
        for (auto& o : outputs) {
            if (set.variants.size() >= n) break;
            set.variants.push_back(std::move(o));
        }
        while (set.variants.size() < n) {
            set.variants.push_back(text);
            ++set.padded;
        }
        if (set.padded > 0 && warnings) *warnings += set.padded;
        return set;
    }

    ParaphraseFn as_paraphraser(std::size_t* warnings = nullptr) const {
        return [this, warnings](const std::string& text, std::size_t n, std::uint64_t) {
            return generate(text, n, warnings);
        };
    }

private:
    static std::vector<std::string> parse_outputs(const std::string& body) {
        std::vector<std::string> outputs;
        const std::string trimmed = trim(body);
        if (!trimmed.empty() && (trimmed.front() == '{' || trimmed.front() == '[')) {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(trimmed);
            } catch (const nlohmann::json::exception& e) {
                throw MalformedResponse(std::string("llm response is not valid JSON: ") + e.what());
            }
            const nlohmann::json* arr = nullptr;
            if (doc.is_array()) {
                arr = &doc;
            } else if (doc.is_object() && doc.contains("outputs") && doc["outputs"].is_array()) {
                arr = &doc["outputs"];
            } else {
                throw MalformedResponse("llm response JSON has no output array");
            }
            for (const auto& item : *arr) {
                if (!item.is_string()) throw MalformedResponse("llm output array holds a non-string");
                const std::string s = trim(item.get<std::string>());
                if (!s.empty()) outputs.push_back(s);
            }
        } else {
            std::size_t start = 0;
            while (start <= body.size()) {
                const std::size_t end = body.find('\n', start);
                const std::string line =
                    trim(body.substr(start, end == std::string::npos ? std::string::npos : end - start));
                if (!line.empty()) outputs.push_back(line);
                if (end == std::string::npos) break;
                start = end + 1;
            }
        }
        return outputs;
    }

    LlmEndpointConfig cfg_;
    mutable std::counting_semaphore<256> slots_;
};

// Shared client behind the ParaphraseFn interface; the n/seed arguments of the
// rule path map to (n, ignored) here since the endpoint owns its sampling.
inline ParaphraseFn make_llm_paraphraser(const LlmEndpointConfig& cfg) {
    auto client = std::make_shared<LlmClient>(cfg);
    return [client](const std::string& text, std::size_t n, std::uint64_t) {
        return client->generate(text, n);
    };
}

}  // namespace robustens
