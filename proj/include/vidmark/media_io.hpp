#ifndef VIDMARK_MEDIA_IO_HPP
#define VIDMARK_MEDIA_IO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace vidmark {

// Single 8-bit sample plane, row-major.
struct Plane {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> samples;

    Plane() = default;
    Plane(int w, int h, uint8_t fill = 0)
        : width(w), height(h), samples(static_cast<size_t>(w) * h, fill) {}

    uint8_t at(int row, int col) const {
        return samples[static_cast<size_t>(row) * width + col];
    }
    uint8_t& at(int row, int col) {
        return samples[static_cast<size_t>(row) * width + col];
    }
    size_t size() const { return samples.size(); }

    bool operator==(const Plane&) const = default;
};

enum class Subsampling { C444, C420 };

// Planar YCbCr frame. Chroma dimensions follow the subsampling mode.
struct Frame {
    Plane y;
    Plane cb;
    Plane cr;
    Subsampling subsampling = Subsampling::C420;

    bool operator==(const Frame&) const = default;
};

struct VideoSequence {
    int width = 0;
    int height = 0;
    int fps_num = 25;
    int fps_den = 1;
    Subsampling subsampling = Subsampling::C420;
    char interlace = 'p';  // y4m I token, passed through untouched
    int aspect_num = 1;
    int aspect_den = 1;
    std::vector<Frame> frames;

    bool operator==(const VideoSequence&) const = default;
};

// Binary watermark bitmap. Bit value 1 means black (PNM P1/P4 convention).
struct WatermarkImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> bits;  // each element 0 or 1

    WatermarkImage() = default;
    WatermarkImage(int w, int h)
        : width(w), height(h), bits(static_cast<size_t>(w) * h, 0) {}

    bool operator==(const WatermarkImage&) const = default;
};

struct RgbImage {
    Plane r;
    Plane g;
    Plane b;

    bool operator==(const RgbImage&) const = default;
};

using PnmImage = std::variant<WatermarkImage, Plane, RgbImage>;

enum class PnmFormat { P1, P2, P3, P4, P5, P6 };

// ---- YUV4MPEG2 ----

// Parses a whole y4m stream. Header tokens W/H/F/I/A/C are honored,
// unknown X tokens skipped. Supported colorspaces: C444, C420, C420jpeg.
VideoSequence parse_y4m(std::span<const uint8_t> bytes);

// Serializes a sequence; output re-parses to an equal sequence and
// round-trips byte-identical for streams this writer produced.
std::vector<uint8_t> write_y4m(const VideoSequence& seq);

// ---- PNM (P1..P6) ----

PnmImage read_pnm(std::span<const uint8_t> bytes);
std::vector<uint8_t> write_pnm(const PnmImage& image, PnmFormat format);

// ---- Color conversion (BT.601 full range) ----

struct Ycbcr {
    uint8_t y, cb, cr;
};
struct Rgb {
    uint8_t r, g, b;
};

Ycbcr rgb_to_ycbcr(uint8_t r, uint8_t g, uint8_t b);
Rgb ycbcr_to_rgb(uint8_t y, uint8_t cb, uint8_t cr);

// Expected chroma plane dimension for a luma extent under a subsampling mode.
inline int chroma_extent(int luma, Subsampling s) {
    return s == Subsampling::C444 ? luma : (luma + 1) / 2;
}

// Validates the per-frame and header invariants, raising on breach.
void validate(const VideoSequence& seq);

} // namespace vidmark

#endif
