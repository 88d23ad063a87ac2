#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace frag {

enum class MediaKind { video, document };

std::string_view to_string(MediaKind kind) noexcept;
MediaKind parse_media_kind(std::string_view text);

enum class ImageFormat { png, jpeg };

/// Encoded raster bytes, passed to backends untouched.
struct ImagePayload {
    std::vector<std::uint8_t> bytes;
    ImageFormat format = ImageFormat::png;

    std::string_view mime_type() const noexcept;
};

/// How video files are turned into a frame directory. Placeholders: {input} {outdir} {fps}.
struct DecoderConfig {
    std::string command_template =
        "ffmpeg -nostdin -loglevel error -i {input} -vf fps={fps} {outdir}/%06d.png";
    double fps = 1.0;
    std::filesystem::path workdir = std::filesystem::temp_directory_path() / "frag-frames";
};

/// A video or document as an ordered, read-only sequence of frame images.
class MediaSource {
public:
    MediaSource(std::string id, MediaKind kind, std::vector<std::filesystem::path> frames);

    const std::string& id() const noexcept { return id_; }
    MediaKind kind() const noexcept { return kind_; }
    std::size_t frame_count() const noexcept { return frames_.size(); }
    const std::filesystem::path& frame_path(std::size_t index) const;

    /// Reads frame `index` from disk. Safe to call concurrently.
    ImagePayload read_frame(std::size_t index) const;

private:
    std::string id_;
    MediaKind kind_;
    std::vector<std::filesystem::path> frames_;
};

struct FrameProposal {
    std::string media_id;
    std::size_t frame_index = 0;
    std::size_t ordinal = 0;

    bool operator==(const FrameProposal&) const = default;
};

/// Ordering used for frame discovery: digit runs compare as integers, everything else bytewise.
bool natural_less(std::string_view a, std::string_view b) noexcept;

/// PNG/JPEG files directly inside `dir`, natural-sorted by file name.
std::vector<std::filesystem::path> discover_frames(const std::filesystem::path& dir);

/// Default media id: file name without extension (directory name for frame directories).
std::string default_media_id(const std::filesystem::path& path);

/// Opens a frame directory, a page directory, or (for videos) a file run through the decoder.
MediaSource open_media(const std::filesystem::path& path, MediaKind kind,
                       const DecoderConfig& decoder = {}, std::string media_id = {});

std::string shell_quote(std::string_view text);
std::string render_decoder_command(std::string_view command_template, const std::filesystem::path& input,
                                   const std::filesystem::path& outdir, double fps);

/// Indices floor((j + 0.5) * T / N), j = 0..N-1, with N = min(n_target, T).
std::vector<std::size_t> uniform_indices(std::size_t t_total, std::size_t n_target);
std::vector<FrameProposal> uniform_sample(const MediaSource& source, std::size_t n_target);

}  // namespace frag
