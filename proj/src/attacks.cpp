#include "vidmark/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "vidmark/error.hpp"
#include "vidmark/keying.hpp"

namespace vidmark {

namespace {

uint8_t clamp_round(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

// Independent prng stream per frame so per-frame work could be reordered
// or parallelized without changing the output.
uint64_t frame_stream_seed(uint64_t seed, int frame) {
    uint64_t state = seed + 0x9E3779B97F4A7C15ull * static_cast<uint64_t>(frame + 1);
    return prng_next(state);
}

// Box-Muller pair from two uniform draws.
class GaussianSource {
public:
    explicit GaussianSource(uint64_t seed) : state_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = prng_uniform(state_);
        double u2 = prng_uniform(state_);
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

void add_noise(Plane& plane, GaussianSource& gauss, double sigma) {
    for (uint8_t& s : plane.samples)
        s = clamp_round(s + sigma * gauss.next());
}

Plane box_blur(const Plane& in) {
    Plane out(in.width, in.height);
    for (int r = 0; r < in.height; r++)
        for (int c = 0; c < in.width; c++) {
            int sum = 0;
            for (int dr = -1; dr <= 1; dr++)
                for (int dc = -1; dc <= 1; dc++) {
                    int rr = std::clamp(r + dr, 0, in.height - 1);
                    int cc = std::clamp(c + dc, 0, in.width - 1);
                    sum += in.at(rr, cc);
                }
            out.at(r, c) = clamp_round(sum / 9.0);
        }
    return out;
}

void crop_plane(Plane& plane, CropRect rect, uint8_t fill) {
    for (int r = 0; r < plane.height; r++)
        for (int c = 0; c < plane.width; c++)
            if (r < rect.y || r >= rect.y + rect.height || c < rect.x ||
                c >= rect.x + rect.width)
                plane.at(r, c) = fill;
}

double bilinear_sample(const Plane& p, double row, double col) {
    int r0 = static_cast<int>(std::floor(row));
    int c0 = static_cast<int>(std::floor(col));
    double fr = row - r0;
    double fc = col - c0;
    auto px = [&](int r, int c) {
        return static_cast<double>(
            p.at(std::clamp(r, 0, p.height - 1), std::clamp(c, 0, p.width - 1)));
    };
    return (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
           fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
}

Plane bilinear_resize(const Plane& in, int w, int h) {
    Plane out(w, h);
    double sr = static_cast<double>(in.height) / h;
    double sc = static_cast<double>(in.width) / w;
    for (int r = 0; r < h; r++)
        for (int c = 0; c < w; c++)
            out.at(r, c) =
                clamp_round(bilinear_sample(in, (r + 0.5) * sr - 0.5, (c + 0.5) * sc - 0.5));
    return out;
}

Plane resize_down_up(const Plane& in, double factor) {
    int w = std::max(1, static_cast<int>(std::lround(in.width * factor)));
    int h = std::max(1, static_cast<int>(std::lround(in.height * factor)));
    return bilinear_resize(bilinear_resize(in, w, h), in.width, in.height);
}

Plane rotate_plane(const Plane& in, double degrees, uint8_t fill) {
    Plane out(in.width, in.height);
    double rad = degrees * std::numbers::pi / 180.0;
    double cs = std::cos(rad), sn = std::sin(rad);
    double cy = (in.height - 1) / 2.0, cx = (in.width - 1) / 2.0;
    for (int r = 0; r < in.height; r++)
        for (int c = 0; c < in.width; c++) {
            // inverse mapping: rotate the output pixel back into the source
            double dy = r - cy, dx = c - cx;
            double sy = cs * dy + sn * dx + cy;
            double sx = -sn * dy + cs * dx + cx;
            if (sy < -0.5 || sy > in.height - 0.5 || sx < -0.5 || sx > in.width - 0.5)
                out.at(r, c) = fill;
            else
                out.at(r, c) = clamp_round(bilinear_sample(in, sy, sx));
        }
    return out;
}

// ---- JPEG quantization model ----

struct DctBasis {
    double c[8][8];
    DctBasis() {
        for (int k = 0; k < 8; k++)
            for (int n = 0; n < 8; n++)
                c[k][n] = (k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0)) *
                          std::cos((2 * n + 1) * k * std::numbers::pi / 16.0);
    }
};

constexpr int kBaseLumaQuant[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  //
    12, 12, 14, 19, 26,  58,  60,  55,  //
    14, 13, 16, 24, 40,  57,  69,  56,  //
    14, 17, 22, 29, 51,  87,  80,  62,  //
    18, 22, 37, 56, 68,  109, 103, 77,  //
    24, 35, 55, 64, 81,  104, 113, 92,  //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
};

void jpeg_quantize_plane(Plane& plane, const std::array<int, 64>& table) {
    static const DctBasis basis;
    for (int br = 0; br + 8 <= plane.height; br += 8)
        for (int bc = 0; bc + 8 <= plane.width; bc += 8) {
            double block[8][8];
            for (int r = 0; r < 8; r++)
                for (int c = 0; c < 8; c++)
                    block[r][c] = plane.at(br + r, bc + c) - 128.0;

            // F = C * block * C^T, quantize, then block = C^T * F * C
            double tmp[8][8], coef[8][8];
            for (int k = 0; k < 8; k++)
                for (int c = 0; c < 8; c++) {
                    double sum = 0;
                    for (int n = 0; n < 8; n++) sum += basis.c[k][n] * block[n][c];
                    tmp[k][c] = sum;
                }
            for (int k = 0; k < 8; k++)
                for (int l = 0; l < 8; l++) {
                    double sum = 0;
                    for (int n = 0; n < 8; n++) sum += tmp[k][n] * basis.c[l][n];
                    int q = table[k * 8 + l];
                    coef[k][l] = static_cast<double>(std::lround(sum / q)) * q;
                }
            for (int n = 0; n < 8; n++)
                for (int c = 0; c < 8; c++) {
                    double sum = 0;
                    for (int k = 0; k < 8; k++) sum += basis.c[k][n] * coef[k][c];
                    tmp[n][c] = sum;
                }
            for (int r = 0; r < 8; r++)
                for (int c = 0; c < 8; c++) {
                    double sum = 0;
                    for (int l = 0; l < 8; l++) sum += tmp[r][l] * basis.c[l][c];
                    plane.at(br + r, bc + c) = clamp_round(sum + 128.0);
                }
        }
}

void validate_spec(const VideoSequence& seq, const AttackSpec& spec) {
    switch (spec.kind) {
    case AttackKind::GaussianNoise:
        if (spec.sigma < 0.0)
            raise(ErrorCode::Parameter, "noise sigma must be >= 0");
        break;
    case AttackKind::Crop:
        if (spec.rect.width < 1 || spec.rect.height < 1 || spec.rect.x < 0 ||
            spec.rect.y < 0 || spec.rect.x + spec.rect.width > seq.width ||
            spec.rect.y + spec.rect.height > seq.height)
            raise(ErrorCode::Parameter, "crop rectangle out of frame bounds");
        break;
    case AttackKind::Resize:
        if (!(spec.factor > 0.0) || spec.factor > 1.0)
            raise(ErrorCode::Parameter, "resize factor must be in (0, 1]");
        break;
    case AttackKind::FrameDrop:
        if (spec.rate < 0.0 || spec.rate >= 1.0)
            raise(ErrorCode::Parameter, "drop rate must be in [0, 1)");
        for (int idx : spec.drop_indices)
            if (idx < 0 || idx >= static_cast<int>(seq.frames.size()))
                raise(ErrorCode::Parameter,
                      "drop index " + std::to_string(idx) + " out of range");
        break;
    case AttackKind::FrameAverage:
        if (spec.window < 1)
            raise(ErrorCode::Parameter, "averaging window must be >= 1");
        break;
    case AttackKind::JpegQuantize:
        if (spec.quality < 1 || spec.quality > 100)
            raise(ErrorCode::Parameter, "jpeg quality must be in [1, 100]");
        break;
    case AttackKind::Blur:
    case AttackKind::Rotate:
        break;
    }
}

} // namespace

std::array<int, 64> jpeg_quant_table(int quality) {
    if (quality < 1 || quality > 100)
        raise(ErrorCode::Parameter, "jpeg quality must be in [1, 100]");
    int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> table;
    for (int i = 0; i < 64; i++)
        table[i] = std::clamp((kBaseLumaQuant[i] * scale + 50) / 100, 1, 255);
    return table;
}

VideoSequence apply_attack(const VideoSequence& seq, const AttackSpec& spec) {
    if (seq.frames.empty())
        raise(ErrorCode::Parameter, "cannot attack an empty video");
    validate_spec(seq, spec);
    VideoSequence out = seq;

    switch (spec.kind) {
    case AttackKind::GaussianNoise: {
        for (size_t f = 0; f < out.frames.size(); f++) {
            GaussianSource gauss(frame_stream_seed(spec.seed, static_cast<int>(f)));
            add_noise(out.frames[f].y, gauss, spec.sigma);
            add_noise(out.frames[f].cb, gauss, spec.sigma);
            add_noise(out.frames[f].cr, gauss, spec.sigma);
        }
        break;
    }
    case AttackKind::Blur: {
        for (Frame& frame : out.frames) {
            frame.y = box_blur(frame.y);
            frame.cb = box_blur(frame.cb);
            frame.cr = box_blur(frame.cr);
        }
        break;
    }
    case AttackKind::Crop: {
        int sub = seq.subsampling == Subsampling::C420 ? 2 : 1;
        CropRect chroma_rect{spec.rect.x / sub, spec.rect.y / sub,
                             std::max(1, spec.rect.width / sub),
                             std::max(1, spec.rect.height / sub)};
        for (Frame& frame : out.frames) {
            crop_plane(frame.y, spec.rect, 0);
            crop_plane(frame.cb, chroma_rect, 128);
            crop_plane(frame.cr, chroma_rect, 128);
        }
        break;
    }
    case AttackKind::Resize: {
        for (Frame& frame : out.frames) {
            frame.y = resize_down_up(frame.y, spec.factor);
            frame.cb = resize_down_up(frame.cb, spec.factor);
            frame.cr = resize_down_up(frame.cr, spec.factor);
        }
        break;
    }
    case AttackKind::Rotate: {
        for (Frame& frame : out.frames) {
            frame.y = rotate_plane(frame.y, spec.degrees, 0);
            frame.cb = rotate_plane(frame.cb, spec.degrees, 128);
            frame.cr = rotate_plane(frame.cr, spec.degrees, 128);
        }
        break;
    }
    case AttackKind::FrameDrop: {
        std::set<int> dropped(spec.drop_indices.begin(), spec.drop_indices.end());
        if (dropped.empty() && spec.rate > 0.0) {
            uint64_t state = spec.seed;
            for (size_t f = 0; f < seq.frames.size(); f++)
                if (prng_uniform(state) < spec.rate) dropped.insert(static_cast<int>(f));
        }
        out.frames.clear();
        for (size_t f = 0; f < seq.frames.size(); f++)
            if (!dropped.count(static_cast<int>(f))) out.frames.push_back(seq.frames[f]);
        if (out.frames.empty())
            raise(ErrorCode::Degenerate, "frame drop removed every frame");
        break;
    }
    case AttackKind::FrameAverage: {
        const int n = static_cast<int>(seq.frames.size());
        const int window = std::min(spec.window, n);
        for (int f = 0; f < n; f++) {
            int lo = std::clamp(f - (window - 1) / 2, 0, n - window);
            Frame& dst = out.frames[f];
            for (auto [plane, pick] :
                 {std::pair{&dst.y, +[](const Frame& fr) { return &fr.y; }},
                  std::pair{&dst.cb, +[](const Frame& fr) { return &fr.cb; }},
                  std::pair{&dst.cr, +[](const Frame& fr) { return &fr.cr; }}}) {
                for (size_t i = 0; i < plane->samples.size(); i++) {
                    int sum = 0;
                    for (int w = 0; w < window; w++)
                        sum += pick(seq.frames[lo + w])->samples[i];
                    plane->samples[i] = clamp_round(static_cast<double>(sum) / window);
                }
            }
        }
        break;
    }
    case AttackKind::JpegQuantize: {
        const std::array<int, 64> table = jpeg_quant_table(spec.quality);
        for (Frame& frame : out.frames) jpeg_quantize_plane(frame.y, table);
        break;
    }
    }
    return out;
}

} // namespace vidmark
