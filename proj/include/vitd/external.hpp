#pragma once

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vitd/errors.hpp"

// Adapter boundary where externally trained classifiers plug into the
// pipeline. Wire protocol, both transports: request {"texts": [...]},
// response {"labels": [...]} with integer codes. The HTTP transport POSTs
// one JSON document; the pipe transport speaks newline-delimited JSON with a
// subprocess.

namespace vitd::models {

class ExternalClassifier {
public:
    virtual ~ExternalClassifier() = default;
    // One label code per input text.
    virtual std::vector<int> classify(const std::vector<std::string>& texts) = 0;
};

namespace detail {

inline std::vector<int> parse_labels_response(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
        return j.at("labels").get<std::vector<int>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("external classifier: bad response: ") + e.what());
    }
}

inline std::string make_request_body(const std::vector<std::string>& texts) {
    return nlohmann::json{{"texts", texts}}.dump();
}

}  // namespace detail

class HttpClassifier : public ExternalClassifier {
public:
    explicit HttpClassifier(const std::string& url) {
        const auto scheme_end = url.find("://");
        const auto path_start =
            url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        if (path_start == std::string::npos) {
            base_ = url;
            path_ = "/";
        } else {
            base_ = url.substr(0, path_start);
            path_ = url.substr(path_start);
        }
    }

    std::vector<int> classify(const std::vector<std::string>& texts) override {
        httplib::Client client(base_);
        client.set_connection_timeout(10);
        client.set_read_timeout(60);
        const auto res =
            client.Post(path_, detail::make_request_body(texts), "application/json");
        if (!res)
            throw Error("external classifier unreachable: " + base_ + path_ + " (" +
                        httplib::to_string(res.error()) + ")");
        if (res->status != 200)
            throw Error("external classifier returned HTTP " +
                        std::to_string(res->status));
        return detail::parse_labels_response(res->body);
    }

private:
    std::string base_;
    std::string path_;
};

// Spawns `command` through /bin/sh per call, writes one JSON request line to
// its stdin, reads one JSON response line from its stdout.
class PipeClassifier : public ExternalClassifier {
public:
    explicit PipeClassifier(std::string command) : command_(std::move(command)) {}

    std::vector<int> classify(const std::vector<std::string>& texts) override {
        int to_child[2];
        int from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0)
            throw Error("external classifier: pipe() failed");
        const pid_t pid = fork();
        if (pid < 0) throw Error("external classifier: fork() failed");
        if (pid == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command_.c_str(), nullptr);
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);

        const std::string request = detail::make_request_body(texts) + "\n";
        std::size_t written = 0;
        while (written < request.size()) {
            const ssize_t n = write(to_child[1], request.data() + written,
                                    request.size() - written);
            if (n <= 0) break;
            written += static_cast<std::size_t>(n);
        }
        close(to_child[1]);

        std::string response;
        char buf[4096];
        while (true) {
            const ssize_t n = read(from_child[0], buf, sizeof(buf));
            if (n <= 0) break;
            response.append(buf, static_cast<std::size_t>(n));
            if (response.find('\n') != std::string::npos) break;
        }
        close(from_child[0]);
        int status = 0;
        waitpid(pid, &status, 0);

        const auto newline = response.find('\n');
        if (newline == std::string::npos && response.empty())
            throw Error("external classifier '" + command_ + "' produced no response");
        return detail::parse_labels_response(
            newline == std::string::npos ? response : response.substr(0, newline));
    }

private:
    std::string command_;
};

// Endpoint syntax: "http://host:port/path" or "cmd:<shell command>".
inline std::unique_ptr<ExternalClassifier> make_external_classifier(
    const std::string& endpoint) {
    if (endpoint.starts_with("cmd:"))
        return std::make_unique<PipeClassifier>(endpoint.substr(4));
    if (endpoint.starts_with("http://") || endpoint.starts_with("https://"))
        return std::make_unique<HttpClassifier>(endpoint);
    throw InputError("bad external endpoint '" + endpoint +
                     "' (expected http(s)://... or cmd:...)");
}

// Runs the adapter over a batch and validates the response: exactly one
// label per text, every label in `expected_labels`.
inline std::vector<int> predict_external(ExternalClassifier& adapter,
                                         const std::vector<std::string>& texts,
                                         const std::vector<int>& expected_labels) {
    const auto labels = adapter.classify(texts);
    if (labels.size() != texts.size())
        throw Error("external classifier returned " + std::to_string(labels.size()) +
                    " labels for " + std::to_string(texts.size()) + " texts");
    for (const int code : labels) {
        if (std::find(expected_labels.begin(), expected_labels.end(), code) ==
            expected_labels.end()) {
            throw Error("external classifier returned invalid label " +
                        std::to_string(code));
        }
    }
    return labels;
}

}  // namespace vitd::models
