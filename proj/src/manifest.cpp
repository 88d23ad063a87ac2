#include "frag/manifest.hpp"

#include "frag/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace fs = std::filesystem;

namespace frag {

using nlohmann::json;

namespace {

std::string require_string(const json& obj, const char* field, std::size_t line) {
    const auto it = obj.find(field);
    if (it == obj.end() || it->is_null()) throw ValidationError(line, std::string("missing field ") + field);
    if (!it->is_string()) throw ValidationError(line, std::string("field ") + field + " must be a string");
    return it->get<std::string>();
}

std::vector<AnswerOption> parse_options(const json& arr, std::size_t line) {
    if (!arr.is_array()) throw ValidationError(line, "field options must be an array");
    std::vector<AnswerOption> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string letter(1, static_cast<char>('A' + i));
        const auto& item = arr[i];
        if (item.is_string()) {
            auto text = item.get<std::string>();
            // tolerate options already written as "A. text"
            if (text.size() >= 3 && text.compare(0, 2, letter + ".") == 0 && text[2] == ' ') text.erase(0, 3);
            out.push_back({letter, std::move(text)});
        } else if (item.is_object()) {
            out.push_back({item.value("letter", letter), item.at("text").get<std::string>()});
        } else {
            throw ValidationError(line, "option " + std::to_string(i) + " must be a string or {letter, text}");
        }
    }
    return out;
}

ManifestEntry parse_line(const std::string& text, std::size_t line, const fs::path& base_dir,
                         const ManifestOptions& options) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error&) {
        throw ValidationError(line, "malformed JSON");
    }
    if (!obj.is_object()) throw ValidationError(line, "expected a JSON object");

    ManifestEntry entry;
    entry.line = line;
    auto& task = entry.task;
    task.id = require_string(obj, "id", line);
    const auto media_path = require_string(obj, "media_path", line);
    const auto media_kind = require_string(obj, "media_kind", line);
    task.question = require_string(obj, "question", line);
    const auto answer_type = require_string(obj, "answer_type", line);

    try {
        entry.media_kind = parse_media_kind(media_kind);
        task.answer_type = parse_answer_type(answer_type);
    } catch (const InvalidArgument& e) {
        throw ValidationError(line, e.what());
    }

    try {
        if (auto it = obj.find("options"); it != obj.end() && !it->is_null()) task.options = parse_options(*it, line);
        if (auto it = obj.find("ground_truths"); it != obj.end() && !it->is_null())
            task.ground_truths = it->get<std::vector<std::string>>();
        if (auto it = obj.find("prompt_template"); it != obj.end() && !it->is_null())
            task.prompt_template = it->get<std::string>();
        if (auto it = obj.find("media_id"); it != obj.end() && !it->is_null())
            entry.media_id = it->get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError(line, e.what());
    }

    if (task.answer_type == AnswerType::extractive && !task.options.empty())
        throw ValidationError(line, "options present with answer_type extractive");
    try {
        task.validate();
    } catch (const InvalidArgument& e) {
        throw ValidationError(line, e.what());
    }

    entry.media_path = fs::path(media_path).is_absolute() ? fs::path(media_path) : base_dir / media_path;
    if (options.require_media && !fs::exists(entry.media_path))
        throw ValidationError(line, "missing media " + entry.media_path.string());
    if (entry.media_id.empty()) entry.media_id = default_media_id(entry.media_path);
    return entry;
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(std::istream& in, const fs::path& base_dir, const ManifestOptions& options) {
    std::vector<ManifestEntry> entries;
    std::set<std::string> ids;
    std::string text;
    for (std::size_t line = 1; std::getline(in, text); ++line) {
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto entry = parse_line(text, line, base_dir, options);
        if (!ids.insert(entry.task.id).second) throw ValidationError(line, "duplicate id " + entry.task.id);
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<ManifestEntry> load_manifest(const fs::path& path, const ManifestOptions& options) {
    std::ifstream in(path);
    if (!in) throw ValidationError(0, "cannot open manifest " + path.string());
    return parse_manifest(in, path.parent_path(), options);
}

}  // namespace frag
