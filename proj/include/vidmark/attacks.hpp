#ifndef VIDMARK_ATTACKS_HPP
#define VIDMARK_ATTACKS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "vidmark/media_io.hpp"

namespace vidmark {

enum class AttackKind {
    GaussianNoise,
    Blur,
    Crop,
    Resize,
    Rotate,
    FrameDrop,
    FrameAverage,
    JpegQuantize,
};

struct CropRect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

struct AttackSpec {
    AttackKind kind = AttackKind::GaussianNoise;
    double sigma = 0.0;          // gaussian_noise
    CropRect rect;               // crop (luma pixel coordinates)
    double factor = 1.0;         // resize, in (0, 1]
    double degrees = 0.0;        // rotate
    double rate = 0.0;           // frame_drop probability, in [0, 1)
    std::vector<int> drop_indices;  // frame_drop explicit list
    int window = 1;              // frame_average
    int quality = 50;            // jpeg_quantize, in [1, 100]
    uint64_t seed = 0;           // stochastic kinds
};

// Applies one attack deterministically. Stochastic kinds derive a
// per-frame prng substream from (seed, frame index) so the output does
// not depend on evaluation order.
VideoSequence apply_attack(const VideoSequence& seq, const AttackSpec& spec);

// JPEG luminance quantization table scaled to the given quality,
// libjpeg convention: scale = 5000/q below 50 else 200 - 2q, entries
// clamped to [1, 255].
std::array<int, 64> jpeg_quant_table(int quality);

} // namespace vidmark

#endif
