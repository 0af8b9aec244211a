#ifndef VIDMARK_WATERMARK_HPP
#define VIDMARK_WATERMARK_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vidmark/keying.hpp"
#include "vidmark/media_io.hpp"

namespace vidmark {

enum class Scheme { Block, Diagonal, DwtBlock };

// Knobs shared by every scheme. delta is the QIM step for the block
// schemes; the diagonal scheme reads it as a relative strength delta/1000.
struct EmbedConfig {
    Scheme scheme = Scheme::Block;
    double delta = 16.0;
    int block_size = 8;  // pixel-domain block edge, fixed at 8
    int frames_per_scene = 1;
    double scene_threshold = 12.0;
    int realign_budget = 16;  // frame offsets scanned after dropping
};

// Per-frame original singular values kept for diagonal extraction.
struct DiagonalReference {
    struct Entry {
        int frame_index = 0;
        std::vector<double> values;
    };
    Scheme scheme = Scheme::Diagonal;
    double delta = 16.0;
    std::vector<Entry> entries;
};

struct SceneRange {
    int begin = 0;
    int end = 0;  // exclusive

    bool operator==(const SceneRange&) const = default;
};

struct EmbedResult {
    VideoSequence video;
    std::vector<int> selected_frames;
    std::optional<DiagonalReference> reference;  // diagonal scheme only
};

struct ExtractOutcome {
    WatermarkImage mark;
    std::vector<int> frames_used;  // indices that contributed to the vote
    bool realigned = false;        // recovered via the offset scan
};

// ---- payload framing ----
// Layout: check_tag (32 bits, big-endian) ++ width (16) ++ height (16)
// ++ row-major watermark bits.

std::vector<uint8_t> build_payload(const WatermarkImage& mark, uint32_t tag);

struct ParsedPayload {
    uint32_t tag = 0;
    WatermarkImage mark;
};
ParsedPayload parse_payload(std::span<const uint8_t> bits);

inline constexpr int kPayloadHeaderBits = 64;

// ---- QIM quantizer ----

// Snaps a non-negative value to the nearest cell center c*delta + delta/2
// whose index parity equals bit; equidistant cells break toward the lower.
double qim_embed(double value, int bit, double delta);

// Parity of the quantizer cell holding value.
int qim_extract(double value, double delta);

// ---- scene segmentation ----

// Declares a cut where the mean absolute luma difference between
// consecutive frames exceeds threshold. Ranges partition the video.
std::vector<SceneRange> detect_scenes(const VideoSequence& seq, double threshold);

// ---- per-frame block scheme ----

// Bit capacity of one plane: whole blocks only.
int block_capacity(int width, int height, int block_size);

// Host order for payload bits: blocks sorted by squared distance of the
// block center from the frame center, ties row-major. Central placement
// keeps the payload inside crop-surviving regions.
std::vector<int> block_host_order(int blocks_x, int blocks_y);

Plane embed_block_frame(const Plane& luma, std::span<const uint8_t> bits,
                        const EmbedConfig& config);
std::vector<uint8_t> extract_block_frame(const Plane& luma, int nbits,
                                         const EmbedConfig& config);

// ---- per-frame diagonal scheme ----

struct DiagonalEmbed {
    Plane luma;
    std::vector<double> reference;  // original s_1..s_|bits|
};

DiagonalEmbed embed_diag_frame(const Plane& luma, std::span<const uint8_t> bits,
                               const EmbedConfig& config);
std::vector<uint8_t> extract_diag_frame(const Plane& luma,
                                        std::span<const double> reference,
                                        const EmbedConfig& config);

// ---- per-frame DWT block scheme ----
// Embeds block-wise in the Haar LL subband. LL blocks are block_size/2 on
// a side so each block keeps the 8x8 pixel footprint of the block scheme
// and the same QIM scale.

int dwt_block_capacity(int width, int height, int block_size);
Plane embed_dwt_frame(const Plane& luma, std::span<const uint8_t> bits,
                      const EmbedConfig& config);
std::vector<uint8_t> extract_dwt_frame(const Plane& luma, int nbits,
                                       const EmbedConfig& config);

// Payload bit capacity of one frame under the configured scheme.
int frame_capacity(int width, int height, const EmbedConfig& config);

// ---- whole-video pipelines ----

// Embeds the same payload into frames_per_scene key-selected frames of
// every scene. Luma only; chroma and unselected frames are untouched.
EmbedResult embed_video(const VideoSequence& seq, const WatermarkImage& mark,
                        const KeyMaterial& key, const EmbedConfig& config);

// Recovers the watermark: per-frame extraction, per-bit majority vote,
// check-tag verification. When the planned frames fail to verify, scans
// offset candidates to survive frame dropping. `trial`, when given, is
// advanced through the attempt (lockout gate, failure/success recording).
ExtractOutcome extract_video(const VideoSequence& seq, const KeyMaterial& key,
                             const EmbedConfig& config,
                             std::optional<std::pair<int, int>> expected_dims = {},
                             const DiagonalReference* sidecar = nullptr,
                             TrialState* trial = nullptr);

} // namespace vidmark

#endif
