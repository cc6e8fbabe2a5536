// Copyright (C) 2026 The POST Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

namespace post::pipeline {

struct RunEntry {
    std::string run_id;
    std::string kind;  ///< "score" or "eval"
    std::string file;  ///< relative to the store root
    std::string created_at;
    std::string content_hash;
};

/// Append-only flat-file store of reports:
///   <root>/runs/<run_id>.json and <root>/index.json.
/// Files are written to a temporary name and renamed into place, so a reader
/// never sees a partial report. One process owns a store at a time.
class RunStore {
public:
    explicit RunStore(std::filesystem::path root);

    /// Writes `report` under a fresh id and appends it to the index.
    std::string append(const std::string& kind, const nlohmann::json& report);
    nlohmann::json get(const std::string& run_id) const;
    std::vector<RunEntry> list() const;

    /// Empty when index and directory agree and every report matches its hash;
    /// otherwise one message per problem.
    std::vector<std::string> verify() const;

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::vector<RunEntry> read_index() const;
    void write_index(const std::vector<RunEntry>& entries) const;

    std::filesystem::path root_;
    mutable std::mutex mu_;
};

}  // namespace post::pipeline
