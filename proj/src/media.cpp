#include "frag/media.hpp"

#include "frag/digest.hpp"
#include "frag/error.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace frag {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::string lower_ascii(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool has_image_extension(const fs::path& p) {
    const auto ext = lower_ascii(p.extension().string());
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

// Sniffs the file signature; throws when the file cannot be read or is not PNG/JPEG.
ImageFormat sniff_format(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw MediaError("unreadable image file: " + p.string());
    std::array<unsigned char, 8> head{};
    in.read(reinterpret_cast<char*>(head.data()), head.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    static constexpr std::array<unsigned char, 8> kPng{0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (got == 8 && std::equal(kPng.begin(), kPng.end(), head.begin())) return ImageFormat::png;
    if (got >= 3 && head[0] == 0xFF && head[1] == 0xD8 && head[2] == 0xFF) return ImageFormat::jpeg;
    throw MediaError("unreadable image file (not PNG or JPEG): " + p.string());
}

struct ProcessResult {
    int exit_code;
    std::string stderr_text;
};

ProcessResult run_shell(const std::string& command) {
    int err_pipe[2];
    if (pipe(err_pipe) != 0) throw MediaError("pipe() failed");
    const pid_t pid = fork();
    if (pid < 0) {
        close(err_pipe[0]);
        close(err_pipe[1]);
        throw MediaError("fork() failed");
    }
    if (pid == 0) {
        dup2(err_pipe[1], STDERR_FILENO);
        close(err_pipe[0]);
        close(err_pipe[1]);
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    close(err_pipe[1]);
    std::string captured;
    std::array<char, 4096> buf{};
    ssize_t n;
    while ((n = read(err_pipe[0], buf.data(), buf.size())) > 0) captured.append(buf.data(), static_cast<std::size_t>(n));
    close(err_pipe[0]);
    int status = 0;
    waitpid(pid, &status, 0);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
    return {code, captured};
}

std::mutex& decoder_lock(const fs::path& outdir) {
    static std::mutex registry_guard;
    static std::map<fs::path, std::mutex> locks;
    std::lock_guard guard(registry_guard);
    return locks[outdir];
}

std::string format_fps(double fps) {
    std::ostringstream os;
    os << fps;
    return os.str();
}

fs::path decode_video(const fs::path& input, const DecoderConfig& cfg) {
    const auto abs_input = fs::absolute(input);
    const auto tag = sha256_hex(abs_input.string() + '\n' + format_fps(cfg.fps) + '\n' + cfg.command_template);
    const auto outdir = fs::absolute(cfg.workdir) / (input.stem().string() + "-" + tag.substr(0, 12));
    const auto marker = outdir / ".complete";

    std::lock_guard guard(decoder_lock(outdir));
    if (fs::exists(marker)) return outdir;
    fs::remove_all(outdir);
    fs::create_directories(outdir);
    const auto result = run_shell(render_decoder_command(cfg.command_template, abs_input, outdir, cfg.fps));
    if (result.exit_code != 0) throw DecoderError(result.exit_code, result.stderr_text);
    std::ofstream(marker).put('\n');
    return outdir;
}

}  // namespace

std::string_view to_string(MediaKind kind) noexcept {
    return kind == MediaKind::video ? "video" : "document";
}

MediaKind parse_media_kind(std::string_view text) {
    if (text == "video") return MediaKind::video;
    if (text == "document") return MediaKind::document;
    throw InvalidArgument("unknown media kind: " + std::string(text));
}

std::string_view ImagePayload::mime_type() const noexcept {
    return format == ImageFormat::png ? "image/png" : "image/jpeg";
}

MediaSource::MediaSource(std::string id, MediaKind kind, std::vector<fs::path> frames)
    : id_(std::move(id)), kind_(kind), frames_(std::move(frames)) {
    if (frames_.empty()) throw MediaError("no frames found for media " + id_);
}

const fs::path& MediaSource::frame_path(std::size_t index) const {
    if (index >= frames_.size())
        throw InvalidArgument("frame index " + std::to_string(index) + " out of range for " + id_);
    return frames_[index];
}

ImagePayload MediaSource::read_frame(std::size_t index) const {
    const auto& path = frame_path(index);
    ImagePayload payload;
    payload.format = sniff_format(path);
    std::ifstream in(path, std::ios::binary);
    payload.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (payload.bytes.empty()) throw MediaError("unreadable image file: " + path.string());
    return payload;
}

bool natural_less(std::string_view a, std::string_view b) noexcept {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (is_digit(a[i]) && is_digit(b[j])) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && is_digit(a[ie])) ++ie;
            while (je < b.size() && is_digit(b[je])) ++je;
            std::size_t is = i, js = j;
            while (is + 1 < ie && a[is] == '0') ++is;
            while (js + 1 < je && b[js] == '0') ++js;
            const auto da = a.substr(is, ie - is), db = b.substr(js, je - js);
            if (da.size() != db.size()) return da.size() < db.size();
            if (da != db) return da < db;
            // equal value: fewer leading zeros first
            if (ie - i != je - j) return ie - i < je - j;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

std::vector<fs::path> discover_frames(const fs::path& dir) {
    std::vector<fs::path> frames;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && has_image_extension(entry.path())) frames.push_back(entry.path());
    }
    std::sort(frames.begin(), frames.end(), [](const fs::path& x, const fs::path& y) {
        return natural_less(x.filename().string(), y.filename().string());
    });
    return frames;
}

std::string default_media_id(const fs::path& path) {
    auto p = path;
    if (!p.has_filename()) p = p.parent_path();
    return fs::is_directory(p) ? p.filename().string() : p.stem().string();
}

MediaSource open_media(const fs::path& path, MediaKind kind, const DecoderConfig& decoder, std::string media_id) {
    if (!fs::exists(path)) throw MediaError("missing media path: " + path.string());
    if (media_id.empty()) media_id = default_media_id(path);

    fs::path frame_dir = path;
    if (!fs::is_directory(path)) {
        if (kind == MediaKind::document)
            throw MediaError("document must be a directory of page images: " + path.string());
        frame_dir = decode_video(path, decoder);
    }

    auto frames = discover_frames(frame_dir);
    if (frames.empty()) throw MediaError("no frames found in " + frame_dir.string());
    for (const auto& f : frames) sniff_format(f);
    return MediaSource(std::move(media_id), kind, std::move(frames));
}

std::string shell_quote(std::string_view text) {
    std::string out = "'";
    for (char c : text) {
        if (c == '\'') out += "'\\''";
        else out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string render_decoder_command(std::string_view command_template, const fs::path& input,
                                   const fs::path& outdir, double fps) {
    std::string out;
    out.reserve(command_template.size() + 64);
    std::size_t pos = 0;
    while (pos < command_template.size()) {
        const auto open = command_template.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(command_template.substr(pos));
            break;
        }
        out.append(command_template.substr(pos, open - pos));
        const auto close = command_template.find('}', open);
        const auto name = close == std::string_view::npos ? std::string_view{}
                                                         : command_template.substr(open + 1, close - open - 1);
        if (name == "input") {
            out += shell_quote(input.string());
        } else if (name == "outdir") {
            // frame patterns such as {outdir}/%06d.png follow directly, so quote only the directory
            out += shell_quote(outdir.string());
        } else if (name == "fps") {
            out += format_fps(fps);
        } else {
            out.push_back('{');
            pos = open + 1;
            continue;
        }
        pos = close + 1;
    }
    return out;
}

std::vector<std::size_t> uniform_indices(std::size_t t_total, std::size_t n_target) {
    if (t_total == 0) throw InvalidArgument("media has no frames");
    if (n_target == 0) throw InvalidArgument("n_target must be >= 1");
    const std::size_t n = std::min(n_target, t_total);
    std::vector<std::size_t> out;
    out.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t idx = ((2 * j + 1) * t_total) / (2 * n);
        // spacing T/N >= 1 keeps consecutive indices distinct
        if (!out.empty() && idx <= out.back()) throw std::logic_error("uniform sampling produced a duplicate index");
        out.push_back(idx);
    }
    return out;
}

std::vector<FrameProposal> uniform_sample(const MediaSource& source, std::size_t n_target) {
    const auto indices = uniform_indices(source.frame_count(), n_target);
    std::vector<FrameProposal> proposals;
    proposals.reserve(indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) proposals.push_back({source.id(), indices[j], j});
    return proposals;
}

}  // namespace frag
