// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/pipeline/service.hpp"

#include <cctype>
#include <fstream>
#include <span>
#include <sstream>

#include <httplib.h>

#include "post/error.hpp"
#include "post/hash.hpp"

namespace post::pipeline {

using nlohmann::json;

Reply error_reply(int status, const std::string& code, const std::string& detail) {
    return {status, {{"error", code}, {"detail", detail}}};
}

int http_status_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::NoDetection:
        case ErrorCode::DegenerateGeometry:
        case ErrorCode::DecodeFailure:
            return 422;
        default:
            return 400;
    }
}

namespace {

Reply from_error(const Error& e) { return error_reply(http_status_for(e.code()), std::string(error_code_name(e.code())), e.detail()); }

// Constant time in the token contents; only the length can leak.
bool same_secret(const std::string& given, const std::string& expected) {
    if (expected.empty() || given.size() != expected.size()) return false;
    unsigned char diff = 0;
    for (std::size_t i = 0; i < given.size(); ++i) diff |= static_cast<unsigned char>(given[i] ^ expected[i]);
    return diff == 0;
}

}  // namespace

struct ScoringService::Impl {
    httplib::Server server;
};

ScoringService::ScoringService(std::shared_ptr<const BoxPredictor> detector,
                               std::shared_ptr<const LandmarkPredictor> landmarks, ServiceOptions opts)
    : detector_(std::move(detector)), landmarks_(std::move(landmarks)), opts_(std::move(opts)),
      impl_(std::make_unique<Impl>()) {
    if (!detector_ || !landmarks_) throw Error(ErrorCode::InvalidArgument, "service needs both models");
    if (opts_.token.empty()) throw Error(ErrorCode::InvalidArgument, "service token must not be empty");
    if (opts_.threads < 1) throw Error(ErrorCode::InvalidArgument, "service needs at least one worker");

    auto& srv = impl_->server;
    const int threads = opts_.threads;
    srv.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
    srv.set_payload_max_length(opts_.max_body_bytes);

    auto send = [this](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        if (!opts_.allow_origin.empty()) res.set_header("Access-Control-Allow-Origin", opts_.allow_origin);
        res.set_content(r.body.dump(), "application/json");
    };
    auto guarded = [this, send](auto handler) {
        return [this, send, handler](const httplib::Request& req, httplib::Response& res) {
            if (!authorized(req.get_header_value("Authorization"))) {
                res.set_header("WWW-Authenticate", "Bearer");
                send(res, error_reply(401, "Unauthorized", "missing or invalid bearer token"));
                return;
            }
            send(res, handler(req));
        };
    };

    srv.Post("/api/v1/score", guarded([this](const httplib::Request& req) {
                 if (!req.has_file("image")) return error_reply(400, "SchemaError", "multipart field 'image' is required");
                 const auto f = req.get_file_value("image");
                 return score(f.content, f.filename);
             }));
    srv.Post("/api/v1/recompute", guarded([this](const httplib::Request& req) { return recompute(req.body); }));
    srv.Get("/api/v1/health", [this, send](const httplib::Request&, httplib::Response& res) { send(res, health()); });
    if (!opts_.allow_origin.empty()) {
        srv.Options(R"(/api/v1/.*)", [this](const httplib::Request&, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", opts_.allow_origin);
            res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type");
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.status = 204;
        });
    }
    srv.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
        send(res, error_reply(500, "InternalError", "unexpected server error"));
    });
    srv.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
        if (res.status == 413) send(res, error_reply(413, "PayloadTooLarge", "request exceeds the size limit"));
        else if (res.status == 404) send(res, error_reply(404, "NotFound", "unknown endpoint"));
    });
}

ScoringService::~ScoringService() { stop(); }

bool ScoringService::authorized(const std::string& header) const {
    static const std::string prefix = "Bearer ";
    if (header.rfind(prefix, 0) != 0) return false;
    return same_secret(header.substr(prefix.size()), opts_.token);
}

Reply ScoringService::score(const std::string& bytes, const std::string& filename) const {
    try {
        if (bytes.size() > opts_.max_body_bytes) return error_reply(413, "PayloadTooLarge", "image exceeds the size limit");
        const Image img = decode_image(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
        std::string id = filename;
        if (id.empty()) {
            Fnv1a h;
            h.update(bytes);
            id = h.hex();
        }
        const ScoreReport r = infer(img, id, *detector_, *landmarks_, opts_.interpretation);
        json body = to_json(r);
        if (opts_.runs) body["run_id"] = opts_.runs->append("score", body);
        return {200, body};
    } catch (const Error& e) {
        return from_error(e);
    }
}

Reply ScoringService::recompute(const std::string& body) const {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        return error_reply(400, "SchemaError", std::string("body is not JSON: ") + e.what());
    }
    try {
        if (!j.is_object() || !j.contains("landmarks")) throw Error(ErrorCode::SchemaError, "body must be {\"landmarks\": {...}}");
        const PostResult r = recompute_score(landmarks_from_json(j.at("landmarks")));
        return {200, to_json(r)};
    } catch (const Error& e) {
        return from_error(e);
    }
}

Reply ScoringService::health() const {
    return {200,
            {{"status", "ok"},
             {"models", {{"detector", detector_->model_hash()}, {"landmarks", landmarks_->model_hash()}}}}};
}

bool ScoringService::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }
int ScoringService::bind_any(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool ScoringService::serve() { return impl_->server.listen_after_bind(); }
void ScoringService::stop() {
    if (impl_) impl_->server.stop();
}
void ScoringService::wait_until_ready() const { impl_->server.wait_until_ready(); }

std::string read_token_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read token file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string t = ss.str();
    while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
    if (t.empty()) throw Error(ErrorCode::InvalidArgument, "token file " + path + " is empty");
    return t;
}

}  // namespace post::pipeline
