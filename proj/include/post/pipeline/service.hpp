// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "post/error.hpp"
#include "post/pipeline/infer.hpp"
#include "post/pipeline/run_store.hpp"

namespace post::pipeline {

struct ServiceOptions {
    std::string token;  ///< required bearer token; must be non-empty
    std::size_t max_body_bytes = 10u * 1024u * 1024u;
    int threads = 4;  ///< concurrent request cap
    InterpretationTable interpretation;
    std::string allow_origin;  ///< CORS origin for the review UI; empty disables CORS headers
    std::shared_ptr<RunStore> runs;  ///< when set, every score report is persisted
};

/// Transport-independent reply, so handlers can be tested without sockets.
struct Reply {
    int status = 200;
    nlohmann::json body;
};

/// JSON body for an error: {"error": code, "detail": str}.
Reply error_reply(int status, const std::string& code, const std::string& detail);
/// 422 for pipeline outcomes (NoDetection, DegenerateGeometry, DecodeFailure), 400 otherwise.
int http_status_for(ErrorCode code) noexcept;

/// Scoring API over shared read-only predictors. Each request works on its own
/// decoded image and report.
class ScoringService {
public:
    ScoringService(std::shared_ptr<const BoxPredictor> detector, std::shared_ptr<const LandmarkPredictor> landmarks,
                   ServiceOptions opts);
    ~ScoringService();
    ScoringService(const ScoringService&) = delete;
    ScoringService& operator=(const ScoringService&) = delete;

    bool authorized(const std::string& authorization_header) const;

    Reply score(const std::string& image_bytes, const std::string& filename) const;
    Reply recompute(const std::string& body) const;
    Reply health() const;

    /// Binds and serves until stop(). Returns false if the port cannot be bound.
    bool listen(const std::string& host, int port);
    /// Binds an ephemeral port and returns it (or -1); call serve() afterwards.
    int bind_any(const std::string& host);
    bool serve();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::shared_ptr<const BoxPredictor> detector_;
    std::shared_ptr<const LandmarkPredictor> landmarks_;
    ServiceOptions opts_;
    std::unique_ptr<Impl> impl_;
};

/// Reads a token file, trimming trailing whitespace. Throws IoError / InvalidArgument when empty.
std::string read_token_file(const std::string& path);

}  // namespace post::pipeline
