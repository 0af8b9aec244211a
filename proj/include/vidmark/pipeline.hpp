#ifndef VIDMARK_PIPELINE_HPP
#define VIDMARK_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "vidmark/attacks.hpp"
#include "vidmark/keying.hpp"
#include "vidmark/media_io.hpp"
#include "vidmark/metrics.hpp"
#include "vidmark/watermark.hpp"

// File-level orchestration shared by the CLI and the python bindings.

namespace vidmark {

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const uint8_t> bytes);

VideoSequence load_video(const std::string& path);
void save_video(const std::string& path, const VideoSequence& seq);

WatermarkImage load_watermark(const std::string& path);
void save_watermark(const std::string& path, const WatermarkImage& mark);

// ---- .wmref sidecar ----
// Line 1: "WMREF1 <scheme> <delta>", then per frame:
// "<frame_index> <K> <s1> ... <sK>" with 17-significant-digit decimals.

std::string wmref_to_text(const DiagonalReference& ref);
DiagonalReference wmref_from_text(const std::string& text);
void save_wmref(const std::string& path, const DiagonalReference& ref);
DiagonalReference load_wmref(const std::string& path);

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

struct EmbedFileResult {
    std::vector<int> selected_frames;
    int capacity = 0;
    int payload_bits = 0;
    double mean_psnr = 0.0;
    std::string sidecar_path;  // empty unless the diagonal scheme ran
};

EmbedFileResult embed_file(const std::string& video_in, const std::string& video_out,
                           const std::string& mark_path, const KeyMaterial& key,
                           const EmbedConfig& config);

struct ExtractFileResult {
    std::vector<int> frames_used;
    bool realigned = false;
    MetricsReport report;
};

// Runs the full extraction against the trial ledger at trials_path:
// lockout gate first, failure recorded on tag mismatch, reset on success.
ExtractFileResult extract_file(const std::string& video_in, const std::string& mark_out,
                               const KeyMaterial& key, const EmbedConfig& config,
                               const std::string& trials_path,
                               std::optional<std::pair<int, int>> expected_dims = {},
                               const std::string& sidecar_path = "",
                               const std::string& reference_mark_path = "");

// Returns the frame count written.
int attack_file(const std::string& video_in, const std::string& video_out,
                const AttackSpec& spec);

std::string default_trials_path();

} // namespace vidmark

#endif
