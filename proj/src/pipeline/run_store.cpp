// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "post/pipeline/run_store.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "post/error.hpp"
#include "post/hash.hpp"
#include "post/models/trainer.hpp"

namespace post::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hash_of(const std::string& text) {
    Fnv1a h;
    h.update(text);
    return h.hex();
}

}  // namespace

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
    fs::create_directories(root_ / "runs");
    if (!fs::exists(root_ / "index.json")) write_index({});
}

std::vector<RunEntry> RunStore::read_index() const {
    json j;
    try {
        j = json::parse(read_file(root_ / "index.json"));
        std::vector<RunEntry> out;
        for (const auto& e : j.at("runs")) {
            out.push_back({e.at("run_id").get<std::string>(), e.at("kind").get<std::string>(),
                           e.at("file").get<std::string>(), e.at("created_at").get<std::string>(),
                           e.at("content_hash").get<std::string>()});
        }
        return out;
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaError, std::string("run index: ") + ex.what());
    }
}

void RunStore::write_index(const std::vector<RunEntry>& entries) const {
    json runs = json::array();
    for (const auto& e : entries) {
        runs.push_back({{"run_id", e.run_id},
                        {"kind", e.kind},
                        {"file", e.file},
                        {"created_at", e.created_at},
                        {"content_hash", e.content_hash}});
    }
    write_atomic(root_ / "index.json", json{{"runs", runs}}.dump(2) + "\n");
}

std::string RunStore::append(const std::string& kind, const json& report) {
    if (kind.empty() || kind.find_first_of("/\\. ") != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument, "bad run kind '" + kind + "'");
    }
    std::lock_guard lock(mu_);
    auto entries = read_index();
    char seq[16];
    std::snprintf(seq, sizeof seq, "%06zu", entries.size() + 1);
    RunEntry e;
    e.run_id = kind + "-" + seq;
    e.kind = kind;
    e.file = "runs/" + e.run_id + ".json";
    e.created_at = models::utc_timestamp();
    const std::string text = report.dump(2) + "\n";
    e.content_hash = hash_of(text);
    const fs::path path = root_ / e.file;
    if (fs::exists(path)) throw Error(ErrorCode::DuplicateId, "run " + e.run_id + " already written");
    write_atomic(path, text);
    entries.push_back(e);
    write_index(entries);
    return e.run_id;
}

json RunStore::get(const std::string& run_id) const {
    std::lock_guard lock(mu_);
    for (const auto& e : read_index()) {
        if (e.run_id == run_id) return json::parse(read_file(root_ / e.file));
    }
    throw Error(ErrorCode::InvalidArgument, "unknown run '" + run_id + "'");
}

std::vector<RunEntry> RunStore::list() const {
    std::lock_guard lock(mu_);
    return read_index();
}

std::vector<std::string> RunStore::verify() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> problems;
    std::set<std::string> indexed;
    for (const auto& e : read_index()) {
        indexed.insert(e.file);
        const fs::path p = root_ / e.file;
        if (!fs::exists(p)) {
            problems.push_back("missing report " + e.file);
        } else if (hash_of(read_file(p)) != e.content_hash) {
            problems.push_back("report " + e.file + " changed after it was written");
        }
    }
    for (const auto& f : fs::directory_iterator(root_ / "runs")) {
        const std::string rel = "runs/" + f.path().filename().string();
        if (!indexed.count(rel)) problems.push_back("unindexed file " + rel);
    }
    return problems;
}

}  // namespace post::pipeline
