#pragma once

#include "frag/media.hpp"
#include "frag/task.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace frag {

struct ManifestEntry {
    QueryTask task;
    std::filesystem::path media_path;
    MediaKind media_kind = MediaKind::video;
    std::string media_id;
    std::size_t line = 0;
};

struct ManifestOptions {
    /// Reject entries whose media_path does not exist. The pipeline turns this off and
    /// fails such tasks individually instead.
    bool require_media = true;
};

/// JSONL, one question per line:
///   {id, media_path, media_kind, question, options?, answer_type, ground_truths?, prompt_template?, media_id?}
/// Relative media paths resolve against `base_dir`. Errors name the 1-based line.
std::vector<ManifestEntry> parse_manifest(std::istream& in, const std::filesystem::path& base_dir,
                                          const ManifestOptions& options = {});
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path, const ManifestOptions& options = {});

}  // namespace frag
