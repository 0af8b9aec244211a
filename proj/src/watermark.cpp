#include "vidmark/watermark.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "vidmark/error.hpp"
#include "vidmark/linalg.hpp"
#include "vidmark/transforms.hpp"

namespace vidmark {

// ---- payload framing ----

namespace {

void push_bits(std::vector<uint8_t>& bits, uint32_t value, int count) {
    for (int i = count - 1; i >= 0; i--)
        bits.push_back(static_cast<uint8_t>((value >> i) & 1));
}

uint32_t pull_bits(std::span<const uint8_t> bits, size_t offset, int count) {
    uint32_t value = 0;
    for (int i = 0; i < count; i++)
        value = (value << 1) | (bits[offset + i] & 1);
    return value;
}

} // namespace

std::vector<uint8_t> build_payload(const WatermarkImage& mark, uint32_t tag) {
    if (mark.width < 1 || mark.height < 1 ||
        mark.bits.size() != static_cast<size_t>(mark.width) * mark.height)
        raise(ErrorCode::Dimension, "watermark bit count does not match dimensions");
    if (mark.width > 0xffff || mark.height > 0xffff)
        raise(ErrorCode::Capacity, "watermark dimensions exceed the 16-bit payload fields");
    std::vector<uint8_t> bits;
    bits.reserve(kPayloadHeaderBits + mark.bits.size());
    push_bits(bits, tag, 32);
    push_bits(bits, static_cast<uint32_t>(mark.width), 16);
    push_bits(bits, static_cast<uint32_t>(mark.height), 16);
    for (uint8_t b : mark.bits) bits.push_back(b & 1);
    return bits;
}

ParsedPayload parse_payload(std::span<const uint8_t> bits) {
    if (bits.size() < kPayloadHeaderBits)
        raise(ErrorCode::BadFormat, "payload shorter than its 64-bit header");
    ParsedPayload parsed;
    parsed.tag = pull_bits(bits, 0, 32);
    int w = static_cast<int>(pull_bits(bits, 32, 16));
    int h = static_cast<int>(pull_bits(bits, 48, 16));
    if (w < 1 || h < 1)
        raise(ErrorCode::BadFormat, "payload declares empty watermark dimensions");
    if (bits.size() != static_cast<size_t>(kPayloadHeaderBits) + static_cast<size_t>(w) * h)
        raise(ErrorCode::BadFormat, "payload length disagrees with declared dimensions");
    parsed.mark = WatermarkImage(w, h);
    for (size_t i = 0; i < parsed.mark.bits.size(); i++)
        parsed.mark.bits[i] = bits[kPayloadHeaderBits + i] & 1;
    return parsed;
}

// ---- QIM ----

double qim_embed(double value, int bit, double delta) {
    if (value < 0.0 || !std::isfinite(value))
        raise(ErrorCode::Domain, "qim_embed requires a non-negative finite value");
    if (delta <= 0.0)
        raise(ErrorCode::Parameter, "qim step must be positive");
    bit &= 1;
    auto center = [&](double cell) { return cell * delta + delta / 2.0; };
    double x = value / delta - 0.5;
    double lo_cell = 2.0 * std::floor((x - bit) / 2.0) + bit;
    double hi_cell = lo_cell + 2.0;
    if (lo_cell < 0.0) return center(hi_cell);
    double d_lo = std::abs(value - center(lo_cell));
    double d_hi = std::abs(value - center(hi_cell));
    return d_lo <= d_hi ? center(lo_cell) : center(hi_cell);
}

int qim_extract(double value, double delta) {
    if (value < 0.0 || !std::isfinite(value))
        raise(ErrorCode::Domain, "qim_extract requires a non-negative finite value");
    if (delta <= 0.0)
        raise(ErrorCode::Parameter, "qim step must be positive");
    return static_cast<int>(std::fmod(std::floor(value / delta), 2.0));
}

// ---- scenes ----

std::vector<SceneRange> detect_scenes(const VideoSequence& seq, double threshold) {
    if (seq.frames.empty())
        raise(ErrorCode::Parameter, "cannot segment an empty video");
    std::vector<SceneRange> scenes;
    int start = 0;
    const int n = static_cast<int>(seq.frames.size());
    for (int t = 1; t < n; t++) {
        const auto& prev = seq.frames[t - 1].y.samples;
        const auto& cur = seq.frames[t].y.samples;
        double sum = 0.0;
        for (size_t i = 0; i < cur.size(); i++)
            sum += std::abs(static_cast<double>(cur[i]) - static_cast<double>(prev[i]));
        if (sum / static_cast<double>(cur.size()) > threshold) {
            scenes.push_back({start, t});
            start = t;
        }
    }
    scenes.push_back({start, n});
    return scenes;
}

// ---- plane/matrix bridging ----

namespace {

Matrix plane_to_matrix(const Plane& p) {
    Matrix m(p.height, p.width);
    for (size_t i = 0; i < p.samples.size(); i++)
        m.data[i] = static_cast<double>(p.samples[i]);
    return m;
}

Plane matrix_to_plane(const Matrix& m) {
    Plane p(m.cols, m.rows);
    for (size_t i = 0; i < m.data.size(); i++)
        p.samples[i] = static_cast<uint8_t>(std::clamp(std::lround(m.data[i]), 0l, 255l));
    return p;
}

Matrix sub_block(const Matrix& m, int row0, int col0, int edge) {
    Matrix b(edge, edge);
    for (int r = 0; r < edge; r++)
        for (int c = 0; c < edge; c++)
            b.at(r, c) = m.at(row0 + r, col0 + c);
    return b;
}

void put_block(Matrix& m, const Matrix& b, int row0, int col0) {
    for (int r = 0; r < b.rows; r++)
        for (int c = 0; c < b.cols; c++)
            m.at(row0 + r, col0 + c) = b.at(r, c);
}

// QIM-modulates s1 of each host block in place, one bit per block.
void embed_blocks(Matrix& host, std::span<const uint8_t> bits, double delta, int edge) {
    int bx = host.cols / edge;
    std::vector<int> order = block_host_order(bx, host.rows / edge);
    for (size_t j = 0; j < bits.size(); j++) {
        int row0 = (order[j] / bx) * edge;
        int col0 = (order[j] % bx) * edge;
        SvdFactors f = svd(sub_block(host, row0, col0, edge));
        f.s[0] = qim_embed(f.s[0], bits[j], delta);
        put_block(host, reconstruct(f), row0, col0);
    }
}

std::vector<uint8_t> extract_blocks(const Matrix& host, int nbits, double delta, int edge) {
    int bx = host.cols / edge;
    std::vector<int> order = block_host_order(bx, host.rows / edge);
    std::vector<uint8_t> bits(nbits);
    for (int j = 0; j < nbits; j++) {
        int row0 = (order[j] / bx) * edge;
        int col0 = (order[j] % bx) * edge;
        bits[j] = static_cast<uint8_t>(
            qim_extract(svd(sub_block(host, row0, col0, edge)).s[0], delta));
    }
    return bits;
}

void require_capacity(int capacity, size_t nbits, const char* scheme) {
    if (static_cast<size_t>(capacity) < nbits)
        raise(ErrorCode::Capacity,
              std::string(scheme) + " capacity exceeded: need " + std::to_string(nbits) +
                  " bits, frame hosts " + std::to_string(capacity));
}

void require_even_dims(int width, int height) {
    if (width % 2 || height % 2)
        raise(ErrorCode::Dimension, "dwt-block scheme requires even frame dimensions");
}

} // namespace

// ---- block scheme ----

int block_capacity(int width, int height, int block_size) {
    return (width / block_size) * (height / block_size);
}

std::vector<int> block_host_order(int blocks_x, int blocks_y) {
    std::vector<int> order(static_cast<size_t>(blocks_x) * blocks_y);
    std::iota(order.begin(), order.end(), 0);
    double cy = (blocks_y - 1) / 2.0;
    double cx = (blocks_x - 1) / 2.0;
    // normalized Chebyshev rings: the first k hosts always sit inside the
    // centered fraction of the grid that any center crop keeps
    auto ring = [&](int idx) {
        double dr = std::abs(idx / blocks_x - cy) / blocks_y;
        double dc = std::abs(idx % blocks_x - cx) / blocks_x;
        return std::max(dr, dc);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return ring(a) < ring(b); });
    return order;
}

Plane embed_block_frame(const Plane& luma, std::span<const uint8_t> bits,
                        const EmbedConfig& config) {
    require_capacity(block_capacity(luma.width, luma.height, config.block_size),
                     bits.size(), "block scheme");
    Matrix host = plane_to_matrix(luma);
    embed_blocks(host, bits, config.delta, config.block_size);
    // Only whole 8x8 blocks were touched; rounding is confined to them too,
    // but converting the full matrix back is byte-identical for the rest.
    return matrix_to_plane(host);
}

std::vector<uint8_t> extract_block_frame(const Plane& luma, int nbits,
                                         const EmbedConfig& config) {
    require_capacity(block_capacity(luma.width, luma.height, config.block_size),
                     static_cast<size_t>(nbits), "block scheme");
    return extract_blocks(plane_to_matrix(luma), nbits, config.delta, config.block_size);
}

// ---- diagonal scheme ----

DiagonalEmbed embed_diag_frame(const Plane& luma, std::span<const uint8_t> bits,
                               const EmbedConfig& config) {
    require_capacity(std::min(luma.width, luma.height), bits.size(), "diagonal scheme");
    SvdFactors f = svd(plane_to_matrix(luma));
    DiagonalEmbed out;
    out.reference.assign(f.s.begin(), f.s.begin() + bits.size());
    const double alpha = config.delta / 1000.0;
    for (size_t i = 0; i < bits.size(); i++)
        f.s[i] *= 1.0 + alpha * (2.0 * (bits[i] & 1) - 1.0);
    out.luma = matrix_to_plane(reconstruct(f));
    return out;
}

std::vector<uint8_t> extract_diag_frame(const Plane& luma,
                                        std::span<const double> reference,
                                        const EmbedConfig& config) {
    (void)config;
    if (reference.empty())
        raise(ErrorCode::SemiBlind,
              "diagonal extraction requires the original singular values "
              "(.wmref sidecar)");
    if (reference.size() > static_cast<size_t>(std::min(luma.width, luma.height)))
        raise(ErrorCode::Dimension, "reference longer than the frame's singular spectrum");
    SvdFactors f = svd(plane_to_matrix(luma));
    std::vector<uint8_t> bits(reference.size());
    for (size_t i = 0; i < reference.size(); i++)
        bits[i] = f.s[i] > reference[i] ? 1 : 0;
    return bits;
}

// ---- DWT block scheme ----

int dwt_block_capacity(int width, int height, int block_size) {
    if (width % 2 || height % 2) return 0;
    return block_capacity(width / 2, height / 2, block_size / 2);
}

Plane embed_dwt_frame(const Plane& luma, std::span<const uint8_t> bits,
                      const EmbedConfig& config) {
    require_even_dims(luma.width, luma.height);
    require_capacity(dwt_block_capacity(luma.width, luma.height, config.block_size),
                     bits.size(), "dwt-block scheme");
    SubbandSet bands = haar_forward(plane_to_matrix(luma));
    embed_blocks(bands.ll, bits, config.delta, config.block_size / 2);
    return matrix_to_plane(haar_inverse(bands));
}

std::vector<uint8_t> extract_dwt_frame(const Plane& luma, int nbits,
                                       const EmbedConfig& config) {
    require_even_dims(luma.width, luma.height);
    require_capacity(dwt_block_capacity(luma.width, luma.height, config.block_size),
                     static_cast<size_t>(nbits), "dwt-block scheme");
    SubbandSet bands = haar_forward(plane_to_matrix(luma));
    return extract_blocks(bands.ll, nbits, config.delta, config.block_size / 2);
}

int frame_capacity(int width, int height, const EmbedConfig& config) {
    switch (config.scheme) {
    case Scheme::Block:
        return block_capacity(width, height, config.block_size);
    case Scheme::Diagonal:
        return std::min(width, height);
    case Scheme::DwtBlock:
        return dwt_block_capacity(width, height, config.block_size);
    }
    return 0;
}

// ---- whole-video pipelines ----

namespace {

Plane embed_frame(const Plane& luma, std::span<const uint8_t> bits,
                  const EmbedConfig& config, std::vector<double>* reference) {
    switch (config.scheme) {
    case Scheme::Block:
        return embed_block_frame(luma, bits, config);
    case Scheme::Diagonal: {
        DiagonalEmbed de = embed_diag_frame(luma, bits, config);
        if (reference) *reference = std::move(de.reference);
        return std::move(de.luma);
    }
    case Scheme::DwtBlock:
        return embed_dwt_frame(luma, bits, config);
    }
    raise(ErrorCode::Internal, "unknown scheme");
}

std::vector<uint8_t> extract_frame_bits(const Plane& luma, int nbits,
                                        const EmbedConfig& config,
                                        std::span<const double> reference) {
    switch (config.scheme) {
    case Scheme::Block:
        return extract_block_frame(luma, nbits, config);
    case Scheme::Diagonal:
        if (reference.size() < static_cast<size_t>(nbits))
            raise(ErrorCode::SemiBlind,
                  "sidecar entry holds fewer singular values than the payload needs");
        return extract_diag_frame(luma, reference.subspan(0, nbits), config);
    case Scheme::DwtBlock:
        return extract_dwt_frame(luma, nbits, config);
    }
    raise(ErrorCode::Internal, "unknown scheme");
}

// Key-driven host frames: frames_per_scene draws inside every scene, each
// scene consuming one seed from the key's splitmix stream.
std::vector<int> plan_selection(const VideoSequence& seq, const KeyMaterial& key,
                                const EmbedConfig& config) {
    std::vector<SceneRange> scenes = detect_scenes(seq, config.scene_threshold);
    std::vector<int> selected;
    uint64_t scene_stream = key.seed;
    for (const SceneRange& scene : scenes) {
        uint64_t scene_seed = prng_next(scene_stream);
        int len = scene.end - scene.begin;
        int m = std::min(config.frames_per_scene, len);
        if (m < 1)
            raise(ErrorCode::Parameter, "frames_per_scene must be >= 1");
        SelectionPlan plan = select_frames(KeyMaterial{scene_seed, key.check_tag}, len, m);
        for (int idx : plan.frame_indices) selected.push_back(scene.begin + idx);
    }
    return selected;
}

std::vector<uint8_t> majority_vote(const std::vector<std::vector<uint8_t>>& ballots) {
    std::vector<uint8_t> voted(ballots.front().size());
    for (size_t i = 0; i < voted.size(); i++) {
        size_t ones = 0;
        for (const auto& b : ballots) ones += b[i];
        voted[i] = 2 * ones > ballots.size() ? 1 : 0;
    }
    return voted;
}

struct VotedHeader {
    uint32_t tag = 0;
    int width = 0;
    int height = 0;
};

VotedHeader parse_header_bits(std::span<const uint8_t> bits) {
    VotedHeader h;
    h.tag = pull_bits(bits, 0, 32);
    h.width = static_cast<int>(pull_bits(bits, 32, 16));
    h.height = static_cast<int>(pull_bits(bits, 48, 16));
    return h;
}

} // namespace

EmbedResult embed_video(const VideoSequence& seq, const WatermarkImage& mark,
                        const KeyMaterial& key, const EmbedConfig& config) {
    if (seq.frames.empty())
        raise(ErrorCode::Parameter, "cannot embed into an empty video");
    if (config.delta <= 0.0)
        raise(ErrorCode::Parameter, "delta must be positive");
    if (config.scheme == Scheme::DwtBlock)
        require_even_dims(seq.width, seq.height);

    std::vector<uint8_t> payload = build_payload(mark, key.check_tag);
    require_capacity(frame_capacity(seq.width, seq.height, config), payload.size(),
                     "payload");

    EmbedResult result;
    result.video = seq;
    result.selected_frames = plan_selection(seq, key, config);
    if (config.scheme == Scheme::Diagonal)
        result.reference = DiagonalReference{Scheme::Diagonal, config.delta, {}};

    for (int idx : result.selected_frames) {
        std::vector<double> reference;
        result.video.frames[idx].y =
            embed_frame(seq.frames[idx].y, payload, config,
                        config.scheme == Scheme::Diagonal ? &reference : nullptr);
        if (result.reference)
            result.reference->entries.push_back({idx, std::move(reference)});
    }
    return result;
}

ExtractOutcome extract_video(const VideoSequence& seq, const KeyMaterial& key,
                             const EmbedConfig& config,
                             std::optional<std::pair<int, int>> expected_dims,
                             const DiagonalReference* sidecar, TrialState* trial) {
    if (trial && trial->locked)
        raise(ErrorCode::Lockout,
              "asset is locked after " + std::to_string(kMaxTrialFailures) +
                  " failed key trials");
    if (seq.frames.empty())
        raise(ErrorCode::Parameter, "cannot extract from an empty video");
    if (config.scheme == Scheme::Diagonal && !sidecar)
        raise(ErrorCode::SemiBlind,
              "the diagonal scheme is semi-blind: pass the .wmref sidecar "
              "written at embed time");

    const int total = static_cast<int>(seq.frames.size());
    const int capacity = frame_capacity(seq.width, seq.height, config);
    if (capacity < kPayloadHeaderBits + 1)
        raise(ErrorCode::Capacity,
              "frames too small to host any payload (capacity " +
                  std::to_string(capacity) + " bits)");

    // Planned hosts plus the per-frame reference spectrum where relevant.
    struct Candidate {
        int planned = 0;                   // index the plan expects
        std::span<const double> reference; // diagonal scheme only
    };
    std::vector<Candidate> planned;
    if (config.scheme == Scheme::Diagonal) {
        for (const auto& entry : sidecar->entries)
            planned.push_back({entry.frame_index, entry.values});
    } else {
        for (int idx : plan_selection(seq, key, config)) planned.push_back({idx, {}});
    }
    if (planned.empty())
        raise(ErrorCode::Degenerate, "selection plan is empty");

    auto frame_payload_bits = [&](int frame, std::span<const double> ref,
                                  int nbits) -> std::vector<uint8_t> {
        return extract_frame_bits(seq.frames[frame].y, nbits, config, ref);
    };
    auto sane_dims = [&](const VotedHeader& h) {
        return h.width >= 1 && h.height >= 1 &&
               static_cast<long>(kPayloadHeaderBits) +
                       static_cast<long>(h.width) * h.height <=
                   capacity;
    };

    auto finish = [&](const std::vector<uint8_t>& payload_bits,
                      std::vector<int> frames_used, bool realigned) {
        ParsedPayload parsed = parse_payload(payload_bits);
        if (expected_dims &&
            (parsed.mark.width != expected_dims->first ||
             parsed.mark.height != expected_dims->second))
            raise(ErrorCode::Degenerate,
                  "extracted dimensions " + std::to_string(parsed.mark.width) + "x" +
                      std::to_string(parsed.mark.height) + " disagree with expected");
        if (trial) *trial = check_trial(*trial, true);
        ExtractOutcome out;
        out.mark = std::move(parsed.mark);
        out.frames_used = std::move(frames_used);
        out.realigned = realigned;
        return out;
    };

    // Phase A: trust the plan, vote headers across planned frames, then
    // vote the full payload when the tag verifies.
    {
        std::vector<std::vector<uint8_t>> headers;
        std::vector<size_t> live;
        for (size_t i = 0; i < planned.size(); i++) {
            const Candidate& c = planned[i];
            if (c.planned < 0 || c.planned >= total) continue;
            headers.push_back(frame_payload_bits(c.planned, c.reference,
                                                 kPayloadHeaderBits));
            live.push_back(i);
        }
        if (!headers.empty()) {
            VotedHeader head = parse_header_bits(majority_vote(headers));
            if (head.tag == key.check_tag && sane_dims(head)) {
                int nbits = kPayloadHeaderBits + head.width * head.height;
                std::vector<std::vector<uint8_t>> ballots;
                std::vector<int> used;
                for (size_t i : live) {
                    const Candidate& c = planned[i];
                    ballots.push_back(frame_payload_bits(c.planned, c.reference, nbits));
                    used.push_back(c.planned);
                }
                return finish(majority_vote(ballots), std::move(used), false);
            }
        }
    }

    // Phase B: the plan missed (frames dropped or shifted). Slide every
    // planned index across the offset budget and accept any frame whose
    // own header tag verifies.
    {
        std::vector<std::vector<uint8_t>> ballots;
        std::vector<int> used;
        int voted_w = 0, voted_h = 0;
        // Blind schemes read the same bits from a frame whichever slot
        // reached it, so they dedupe per frame; the diagonal scheme pairs
        // each slot's reference with the frame and dedupes per pairing.
        std::set<std::pair<int, int>> seen;
        for (int offset = 0; offset <= config.realign_budget; offset++) {
            for (size_t slot = 0; slot < planned.size(); slot++) {
                for (int dir : {-1, +1}) {
                    if (offset == 0 && dir == +1) continue;
                    int frame = planned[slot].planned + dir * offset;
                    if (frame < 0 || frame >= total) continue;
                    int dedupe_slot =
                        config.scheme == Scheme::Diagonal ? static_cast<int>(slot) : 0;
                    if (!seen.insert({frame, dedupe_slot}).second) continue;
                    std::vector<uint8_t> header = frame_payload_bits(
                        frame, planned[slot].reference, kPayloadHeaderBits);
                    VotedHeader head = parse_header_bits(header);
                    if (head.tag != key.check_tag || !sane_dims(head)) continue;
                    if (ballots.empty()) {
                        voted_w = head.width;
                        voted_h = head.height;
                    } else if (head.width != voted_w || head.height != voted_h) {
                        continue;
                    }
                    int nbits = kPayloadHeaderBits + voted_w * voted_h;
                    ballots.push_back(
                        frame_payload_bits(frame, planned[slot].reference, nbits));
                    used.push_back(frame);
                }
            }
        }
        if (!ballots.empty())
            return finish(majority_vote(ballots), std::move(used), true);
    }

    if (trial) *trial = check_trial(*trial, false);
    raise(ErrorCode::Auth,
          "check tag did not verify: wrong key, or the watermark was destroyed");
}

} // namespace vidmark
