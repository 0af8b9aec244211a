#include "vidmark/pipeline.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "vidmark/error.hpp"

namespace vidmark {

std::vector<uint8_t> read_file(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) raise(ErrorCode::Io, "cannot open '" + path + "' for reading");
    std::vector<uint8_t> bytes;
    uint8_t buf[65536];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0)
        bytes.insert(bytes.end(), buf, buf + n);
    bool failed = std::ferror(f);
    std::fclose(f);
    if (failed) raise(ErrorCode::Io, "read failure on '" + path + "'");
    return bytes;
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) raise(ErrorCode::Io, "cannot open '" + path + "' for writing");
    size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
    bool failed = written != bytes.size() || std::fclose(f) != 0;
    if (failed) raise(ErrorCode::Io, "write failure on '" + path + "'");
}

VideoSequence load_video(const std::string& path) {
    return parse_y4m(read_file(path));
}

void save_video(const std::string& path, const VideoSequence& seq) {
    write_file(path, write_y4m(seq));
}

WatermarkImage load_watermark(const std::string& path) {
    PnmImage image = read_pnm(read_file(path));
    if (const auto* mark = std::get_if<WatermarkImage>(&image)) return *mark;
    raise(ErrorCode::BadFormat,
          "'" + path + "' is not a bitmap (P1/P4); the watermark must be binary");
}

void save_watermark(const std::string& path, const WatermarkImage& mark) {
    write_file(path, write_pnm(mark, PnmFormat::P4));
}

// ---- wmref sidecar ----

std::string scheme_name(Scheme scheme) {
    switch (scheme) {
    case Scheme::Block: return "block";
    case Scheme::Diagonal: return "diagonal";
    case Scheme::DwtBlock: return "dwt-block";
    }
    return "?";
}

Scheme scheme_from_name(const std::string& name) {
    if (name == "block") return Scheme::Block;
    if (name == "diagonal") return Scheme::Diagonal;
    if (name == "dwt-block" || name == "dwt_block") return Scheme::DwtBlock;
    raise(ErrorCode::Parameter, "unknown scheme '" + name + "'");
}

std::string wmref_to_text(const DiagonalReference& ref) {
    std::string out = "WMREF1 " + scheme_name(ref.scheme) + " ";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", ref.delta);
    out += buf;
    out += "\n";
    for (const auto& entry : ref.entries) {
        out += std::to_string(entry.frame_index) + " " +
               std::to_string(entry.values.size());
        for (double v : entry.values) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

DiagonalReference wmref_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string magic, scheme;
    DiagonalReference ref;
    if (!(in >> magic >> scheme >> ref.delta) || magic != "WMREF1")
        raise(ErrorCode::BadFormat, "not a WMREF1 sidecar");
    ref.scheme = scheme_from_name(scheme);
    int frame_index = 0;
    while (in >> frame_index) {
        size_t count = 0;
        if (!(in >> count))
            raise(ErrorCode::BadFormat, "sidecar entry missing its value count");
        DiagonalReference::Entry entry;
        entry.frame_index = frame_index;
        entry.values.resize(count);
        for (size_t i = 0; i < count; i++)
            if (!(in >> entry.values[i]))
                raise(ErrorCode::BadFormat, "sidecar entry truncated");
        ref.entries.push_back(std::move(entry));
    }
    return ref;
}

void save_wmref(const std::string& path, const DiagonalReference& ref) {
    std::string text = wmref_to_text(ref);
    write_file(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

DiagonalReference load_wmref(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    return wmref_from_text(std::string(bytes.begin(), bytes.end()));
}

// ---- file-level commands ----

EmbedFileResult embed_file(const std::string& video_in, const std::string& video_out,
                           const std::string& mark_path, const KeyMaterial& key,
                           const EmbedConfig& config) {
    VideoSequence seq = load_video(video_in);
    WatermarkImage mark = load_watermark(mark_path);

    EmbedResult embedded = embed_video(seq, mark, key, config);
    save_video(video_out, embedded.video);

    EmbedFileResult out;
    out.selected_frames = embedded.selected_frames;
    out.capacity = frame_capacity(seq.width, seq.height, config);
    out.payload_bits = kPayloadHeaderBits + mark.width * mark.height;
    out.mean_psnr =
        psnr_report(seq, embedded.video, embedded.selected_frames).mean_psnr;
    if (embedded.reference) {
        out.sidecar_path = video_out + ".wmref";
        save_wmref(out.sidecar_path, *embedded.reference);
    }
    return out;
}

ExtractFileResult extract_file(const std::string& video_in, const std::string& mark_out,
                               const KeyMaterial& key, const EmbedConfig& config,
                               const std::string& trials_path,
                               std::optional<std::pair<int, int>> expected_dims,
                               const std::string& sidecar_path,
                               const std::string& reference_mark_path) {
    std::vector<uint8_t> video_bytes = read_file(video_in);
    VideoSequence seq = parse_y4m(video_bytes);

    std::optional<DiagonalReference> sidecar;
    if (!sidecar_path.empty()) sidecar = load_wmref(sidecar_path);
    if (config.scheme == Scheme::Diagonal && !sidecar)
        raise(ErrorCode::SemiBlind,
              "the diagonal scheme is semi-blind: pass the .wmref sidecar via --sidecar");

    // one lock across the whole attempt: concurrent extractions serialize
    TrialFileLock ledger(trials_path);
    TrialState trial = ledger.load(asset_digest(video_bytes));
    ExtractFileResult out;
    try {
        ExtractOutcome outcome =
            extract_video(seq, key, config, expected_dims,
                          sidecar ? &*sidecar : nullptr, &trial);
        ledger.store(trial);
        save_watermark(mark_out, outcome.mark);
        out.frames_used = outcome.frames_used;
        out.realigned = outcome.realigned;
        out.report.status = "ok";
        if (!reference_mark_path.empty()) {
            WatermarkImage reference = load_watermark(reference_mark_path);
            out.report.nc = nc(reference, outcome.mark);
            out.report.ber = ber(reference, outcome.mark);
            out.report.has_mark_metrics = true;
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Auth) ledger.store(trial);
        throw;
    }
    return out;
}

int attack_file(const std::string& video_in, const std::string& video_out,
                const AttackSpec& spec) {
    VideoSequence attacked = apply_attack(load_video(video_in), spec);
    save_video(video_out, attacked);
    return static_cast<int>(attacked.frames.size());
}

std::string default_trials_path() {
    if (const char* env = std::getenv("WM_TRIALS_PATH"); env && *env) return env;
    return "./.wm_trials";
}

} // namespace vidmark
