#pragma once

#include <cstdlib>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vitd/augment.hpp"
#include "vitd/errors.hpp"

// Live translation-API client. POST {"q", "source", "target", "format":
// "text"} -> {"translatedText": ...}. HTTP 429/5xx and timeouts are
// transient (retried by cached_translate); other 4xx abort immediately.

namespace vitd::augment {

class HttpTranslator : public Translator {
public:
    // `url` like http://host:port/translate; `api_key`, when non-empty, is
    // sent as the `key` query parameter.
    HttpTranslator(std::string url, std::string api_key)
        : api_key_(std::move(api_key)) {
        const auto scheme_end = url.find("://");
        const auto path_start =
            url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = std::move(url);
            path_ = "/";
        } else {
            base_ = url.substr(0, path_start);
            path_ = url.substr(path_start);
        }
    }

    // Reads TRANSLATE_API_URL / TRANSLATE_API_KEY.
    static HttpTranslator from_env() {
        const char* url = std::getenv("TRANSLATE_API_URL");
        if (!url || !*url)
            throw InputError(
                "live translator selected but TRANSLATE_API_URL is not set");
        const char* key = std::getenv("TRANSLATE_API_KEY");
        return HttpTranslator(url, key ? key : "");
    }

    std::string translate(const std::string& text, const std::string& source,
                          const std::string& target) override {
        httplib::Client client(base_);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        const nlohmann::json body{
            {"q", text}, {"source", source}, {"target", target}, {"format", "text"}};
        std::string path = path_;
        if (!api_key_.empty())
            path += (path.find('?') == std::string::npos ? "?key=" : "&key=") +
                    httplib::detail::encode_url(api_key_);
        const auto res = client.Post(path, body.dump(), "application/json");
        if (!res)
            throw TranslationError("translation request to " + base_ + " failed: " +
                                       httplib::to_string(res.error()),
                                   /*transient=*/true);
        if (res->status == 429 || res->status >= 500)
            throw TranslationError("translation API returned HTTP " +
                                       std::to_string(res->status),
                                   /*transient=*/true);
        if (res->status != 200)
            throw TranslationError("translation API returned HTTP " +
                                       std::to_string(res->status),
                                   /*transient=*/false);
        try {
            return nlohmann::json::parse(res->body)
                .at("translatedText")
                .get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TranslationError(
                std::string("translation API returned malformed JSON: ") + e.what(),
                /*transient=*/false);
        }
    }

private:
    std::string base_;
    std::string path_;
    std::string api_key_;
};

}  // namespace vitd::augment
