#include "vidmark/media_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "vidmark/error.hpp"

namespace vidmark {

namespace {

constexpr std::string_view kY4mMagic = "YUV4MPEG2";

// Cursor over the input bytes; all reads are bounds-checked.
struct ByteReader {
    std::span<const uint8_t> bytes;
    size_t pos = 0;

    bool eof() const { return pos >= bytes.size(); }
    size_t remaining() const { return bytes.size() - pos; }

    int peek() const { return eof() ? -1 : bytes[pos]; }
    int get() { return eof() ? -1 : bytes[pos++]; }

    bool consume(std::string_view token) {
        if (remaining() < token.size()) return false;
        if (std::memcmp(bytes.data() + pos, token.data(), token.size()) != 0)
            return false;
        pos += token.size();
        return true;
    }

    // Reads up to the next '\n' (consumed, not returned).
    std::string read_line() {
        std::string line;
        while (!eof()) {
            char c = static_cast<char>(get());
            if (c == '\n') return line;
            line.push_back(c);
        }
        raise(ErrorCode::Truncated, "stream ended inside a header line");
    }
};

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') i++;
        size_t j = i;
        while (j < line.size() && line[j] != ' ') j++;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
    }
    return tokens;
}

int parse_positive_int(const std::string& text, const char* what) {
    if (text.empty() || text.size() > 9 ||
        !std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; }))
        raise(ErrorCode::BadFormat, std::string("bad ") + what + " value '" + text + "'");
    int value = std::stoi(text);
    if (value < 1)
        raise(ErrorCode::BadFormat, std::string(what) + " must be >= 1");
    return value;
}

std::pair<int, int> parse_ratio(const std::string& text, const char* what) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        raise(ErrorCode::BadFormat, std::string("bad ") + what + " ratio '" + text + "'");
    return {parse_positive_int(text.substr(0, colon), what),
            parse_positive_int(text.substr(colon + 1), what)};
}

Plane read_plane(ByteReader& reader, int w, int h, size_t frame_index) {
    // bound the allocation by the stream before constructing the plane
    size_t need = static_cast<size_t>(w) * static_cast<size_t>(h);
    if (reader.remaining() < need)
        raise(ErrorCode::Truncated,
              "truncated payload in frame " + std::to_string(frame_index));
    Plane plane(w, h);
    std::memcpy(plane.samples.data(), reader.bytes.data() + reader.pos, need);
    reader.pos += need;
    return plane;
}

} // namespace

void validate(const VideoSequence& seq) {
    if (seq.width < 1 || seq.height < 1)
        raise(ErrorCode::Dimension, "sequence dimensions must be >= 1");
    if (seq.fps_num < 1 || seq.fps_den < 1)
        raise(ErrorCode::Parameter, "frame rate terms must be >= 1");
    if (seq.subsampling == Subsampling::C420 && (seq.width % 2 || seq.height % 2))
        raise(ErrorCode::Dimension, "C420 requires even luma dimensions");
    int cw = chroma_extent(seq.width, seq.subsampling);
    int ch = chroma_extent(seq.height, seq.subsampling);
    for (size_t i = 0; i < seq.frames.size(); i++) {
        const Frame& f = seq.frames[i];
        auto bad = [&](const char* what) {
            raise(ErrorCode::Dimension,
                  std::string(what) + " mismatch in frame " + std::to_string(i));
        };
        if (f.subsampling != seq.subsampling) bad("subsampling");
        if (f.y.width != seq.width || f.y.height != seq.height) bad("luma size");
        if (f.y.samples.size() != static_cast<size_t>(seq.width) * seq.height)
            bad("luma sample count");
        for (const Plane* p : {&f.cb, &f.cr}) {
            if (p->width != cw || p->height != ch) bad("chroma size");
            if (p->samples.size() != static_cast<size_t>(cw) * ch)
                bad("chroma sample count");
        }
    }
}

VideoSequence parse_y4m(std::span<const uint8_t> bytes) {
    ByteReader reader{bytes};
    if (!reader.consume(kY4mMagic))
        raise(ErrorCode::BadFormat, "not a YUV4MPEG2 stream (bad magic)");

    VideoSequence seq;
    seq.fps_num = 0;  // detect a missing F token below
    bool have_w = false, have_h = false;
    std::string colorspace = "C420";

    std::string header = reader.read_line();
    for (const std::string& token : split_tokens(header)) {
        switch (token[0]) {
        case 'W':
            seq.width = parse_positive_int(token.substr(1), "width");
            have_w = true;
            break;
        case 'H':
            seq.height = parse_positive_int(token.substr(1), "height");
            have_h = true;
            break;
        case 'F': {
            auto [num, den] = parse_ratio(token.substr(1), "frame rate");
            seq.fps_num = num;
            seq.fps_den = den;
            break;
        }
        case 'I':
            if (token.size() != 2 || std::string("ptbm").find(token[1]) == std::string::npos)
                raise(ErrorCode::BadFormat, "bad interlace token '" + token + "'");
            seq.interlace = token[1];
            break;
        case 'A': {
            auto [num, den] = parse_ratio(token.substr(1), "aspect");
            seq.aspect_num = num;
            seq.aspect_den = den;
            break;
        }
        case 'C':
            colorspace = token;
            break;
        case 'X':
            break;  // comment/extension tokens pass through unread
        default:
            raise(ErrorCode::BadFormat, "unknown header token '" + token + "'");
        }
    }
    if (!have_w || !have_h)
        raise(ErrorCode::BadFormat, "header missing W or H");
    if (seq.fps_num == 0) {
        seq.fps_num = 25;
        seq.fps_den = 1;
    }

    if (colorspace == "C444") {
        seq.subsampling = Subsampling::C444;
    } else if (colorspace == "C420" || colorspace == "C420jpeg") {
        seq.subsampling = Subsampling::C420;
    } else {
        raise(ErrorCode::Unsupported, "unsupported colorspace tag '" + colorspace + "'");
    }
    if (seq.subsampling == Subsampling::C420 && (seq.width % 2 || seq.height % 2))
        raise(ErrorCode::BadFormat, "C420 stream with odd luma dimensions");

    int cw = chroma_extent(seq.width, seq.subsampling);
    int ch = chroma_extent(seq.height, seq.subsampling);

    while (!reader.eof()) {
        if (!reader.consume("FRAME"))
            raise(ErrorCode::BadFormat,
                  "expected FRAME marker before frame " + std::to_string(seq.frames.size()));
        std::string params = reader.read_line();
        if (!params.empty() && params[0] != ' ')
            raise(ErrorCode::BadFormat, "malformed FRAME marker");

        Frame frame;
        frame.subsampling = seq.subsampling;
        frame.y = read_plane(reader, seq.width, seq.height, seq.frames.size());
        frame.cb = read_plane(reader, cw, ch, seq.frames.size());
        frame.cr = read_plane(reader, cw, ch, seq.frames.size());
        seq.frames.push_back(std::move(frame));
    }
    return seq;
}

std::vector<uint8_t> write_y4m(const VideoSequence& seq) {
    validate(seq);
    std::string header = std::string(kY4mMagic) + " W" + std::to_string(seq.width) +
                         " H" + std::to_string(seq.height) + " F" +
                         std::to_string(seq.fps_num) + ":" + std::to_string(seq.fps_den) +
                         " I" + seq.interlace + " A" + std::to_string(seq.aspect_num) +
                         ":" + std::to_string(seq.aspect_den) +
                         (seq.subsampling == Subsampling::C444 ? " C444" : " C420") + "\n";

    std::vector<uint8_t> out(header.begin(), header.end());
    size_t frame_bytes = 0;
    if (!seq.frames.empty())
        frame_bytes = seq.frames[0].y.size() + seq.frames[0].cb.size() + seq.frames[0].cr.size();
    out.reserve(out.size() + seq.frames.size() * (6 + frame_bytes));

    for (const Frame& f : seq.frames) {
        const char* marker = "FRAME\n";
        out.insert(out.end(), marker, marker + 6);
        for (const Plane* p : {&f.y, &f.cb, &f.cr})
            out.insert(out.end(), p->samples.begin(), p->samples.end());
    }
    return out;
}

// ---- PNM ----

namespace {

// Skips whitespace and '#' comment lines between header fields.
void skip_pnm_separators(ByteReader& reader) {
    for (;;) {
        int c = reader.peek();
        if (c == '#') {
            while (!reader.eof() && reader.get() != '\n') {
            }
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            reader.get();
        } else {
            return;
        }
    }
}

int read_pnm_int(ByteReader& reader, const char* what) {
    skip_pnm_separators(reader);
    if (reader.eof() || reader.peek() < '0' || reader.peek() > '9')
        raise(ErrorCode::BadFormat, std::string("expected ") + what + " in PNM header");
    long value = 0;
    while (!reader.eof() && reader.peek() >= '0' && reader.peek() <= '9') {
        value = value * 10 + (reader.get() - '0');
        if (value > 1u << 30)
            raise(ErrorCode::BadFormat, std::string(what) + " out of range");
    }
    return static_cast<int>(value);
}

void require_dims(int w, int h) {
    if (w < 1 || h < 1)
        raise(ErrorCode::BadFormat, "PNM dimensions must be >= 1");
}

// Every valid payload needs at least min_bytes more input; rejecting
// dimension bombs here keeps allocations bounded by the stream size.
void require_payload_bytes(const ByteReader& reader, size_t min_bytes) {
    if (reader.remaining() < min_bytes)
        raise(ErrorCode::Truncated, "PNM payload shorter than its dimensions imply");
}

void require_maxval_255(ByteReader& reader) {
    int maxval = read_pnm_int(reader, "maxval");
    if (maxval != 255)
        raise(ErrorCode::Unsupported,
              "unsupported maxval " + std::to_string(maxval) + " (only 255)");
}

// Exactly one whitespace byte separates the header from binary payload.
void consume_single_separator(ByteReader& reader) {
    int c = reader.get();
    if (c != ' ' && c != '\t' && c != '\r' && c != '\n')
        raise(ErrorCode::BadFormat, "missing separator before PNM payload");
}

std::vector<uint8_t> read_raw(ByteReader& reader, size_t count, const char* what) {
    if (reader.remaining() < count)
        raise(ErrorCode::Truncated, std::string("truncated ") + what + " payload");
    std::vector<uint8_t> data(reader.bytes.begin() + reader.pos,
                              reader.bytes.begin() + reader.pos + count);
    reader.pos += count;
    return data;
}

std::vector<uint8_t> read_ascii_samples(ByteReader& reader, size_t count) {
    std::vector<uint8_t> data;
    data.reserve(count);
    for (size_t i = 0; i < count; i++) {
        int v = read_pnm_int(reader, "sample");
        if (v > 255)
            raise(ErrorCode::BadFormat, "ASCII sample exceeds 255");
        data.push_back(static_cast<uint8_t>(v));
    }
    return data;
}

} // namespace

PnmImage read_pnm(std::span<const uint8_t> bytes) {
    ByteReader reader{bytes};
    if (reader.remaining() < 2 || reader.get() != 'P')
        raise(ErrorCode::BadFormat, "not a PNM image (bad magic)");
    int digit = reader.get();
    if (digit < '1' || digit > '6')
        raise(ErrorCode::BadFormat, "not a PNM image (bad magic)");

    int w = read_pnm_int(reader, "width");
    int h = read_pnm_int(reader, "height");
    require_dims(w, h);
    size_t pixels = static_cast<size_t>(w) * h;

    switch (digit) {
    case '1': {
        require_payload_bytes(reader, pixels);  // one char per bit at least
        WatermarkImage mark(w, h);
        for (size_t i = 0; i < pixels; i++) {
            skip_pnm_separators(reader);
            int c = reader.get();
            if (c != '0' && c != '1')
                raise(ErrorCode::BadFormat, "P1 payload must contain only 0/1");
            mark.bits[i] = static_cast<uint8_t>(c - '0');
        }
        return mark;
    }
    case '4': {
        consume_single_separator(reader);
        size_t row_bytes = (static_cast<size_t>(w) + 7) / 8;
        auto raw = read_raw(reader, row_bytes * h, "P4");
        WatermarkImage mark(w, h);
        for (int r = 0; r < h; r++)
            for (int c = 0; c < w; c++) {
                uint8_t byte = raw[r * row_bytes + c / 8];
                mark.bits[static_cast<size_t>(r) * w + c] = (byte >> (7 - c % 8)) & 1;
            }
        return mark;
    }
    case '2': {
        require_maxval_255(reader);
        require_payload_bytes(reader, pixels);
        Plane plane(w, h);
        plane.samples = read_ascii_samples(reader, pixels);
        return plane;
    }
    case '5': {
        require_maxval_255(reader);
        consume_single_separator(reader);
        require_payload_bytes(reader, pixels);
        Plane plane(w, h);
        plane.samples = read_raw(reader, pixels, "P5");
        return plane;
    }
    case '3':
    case '6': {
        require_maxval_255(reader);
        require_payload_bytes(reader, pixels * 3);
        std::vector<uint8_t> raw;
        if (digit == '6') {
            consume_single_separator(reader);
            raw = read_raw(reader, pixels * 3, "P6");
        } else {
            raw = read_ascii_samples(reader, pixels * 3);
        }
        RgbImage rgb{Plane(w, h), Plane(w, h), Plane(w, h)};
        for (size_t i = 0; i < pixels; i++) {
            rgb.r.samples[i] = raw[3 * i];
            rgb.g.samples[i] = raw[3 * i + 1];
            rgb.b.samples[i] = raw[3 * i + 2];
        }
        return rgb;
    }
    default:
        raise(ErrorCode::Internal, "unreachable PNM variant");
    }
}

std::vector<uint8_t> write_pnm(const PnmImage& image, PnmFormat format) {
    auto header = [](char digit, int w, int h, bool maxval) {
        std::string text = std::string("P") + digit + "\n" + std::to_string(w) + " " +
                           std::to_string(h) + "\n" + (maxval ? "255\n" : "");
        return std::vector<uint8_t>(text.begin(), text.end());
    };

    switch (format) {
    case PnmFormat::P1:
    case PnmFormat::P4: {
        const auto* mark = std::get_if<WatermarkImage>(&image);
        if (!mark)
            raise(ErrorCode::Parameter, "bitmap formats require a watermark image");
        if (mark->width < 1 || mark->height < 1 ||
            mark->bits.size() != static_cast<size_t>(mark->width) * mark->height)
            raise(ErrorCode::Dimension, "watermark bit count does not match dimensions");
        auto out = header(format == PnmFormat::P1 ? '1' : '4', mark->width, mark->height, false);
        if (format == PnmFormat::P1) {
            for (int r = 0; r < mark->height; r++) {
                std::string row;
                for (int c = 0; c < mark->width; c++) {
                    if (c) row.push_back(' ');
                    row.push_back(mark->bits[static_cast<size_t>(r) * mark->width + c] ? '1' : '0');
                }
                row.push_back('\n');
                out.insert(out.end(), row.begin(), row.end());
            }
        } else {
            size_t row_bytes = (static_cast<size_t>(mark->width) + 7) / 8;
            for (int r = 0; r < mark->height; r++) {
                std::vector<uint8_t> row(row_bytes, 0);
                for (int c = 0; c < mark->width; c++)
                    if (mark->bits[static_cast<size_t>(r) * mark->width + c])
                        row[c / 8] |= static_cast<uint8_t>(0x80 >> (c % 8));
                out.insert(out.end(), row.begin(), row.end());
            }
        }
        return out;
    }
    case PnmFormat::P2:
    case PnmFormat::P5: {
        const auto* plane = std::get_if<Plane>(&image);
        if (!plane)
            raise(ErrorCode::Parameter, "graymap formats require a plane");
        auto out = header(format == PnmFormat::P2 ? '2' : '5', plane->width, plane->height, true);
        if (format == PnmFormat::P5) {
            out.insert(out.end(), plane->samples.begin(), plane->samples.end());
        } else {
            for (int r = 0; r < plane->height; r++) {
                std::string row;
                for (int c = 0; c < plane->width; c++) {
                    if (c) row.push_back(' ');
                    row += std::to_string(plane->at(r, c));
                }
                row.push_back('\n');
                out.insert(out.end(), row.begin(), row.end());
            }
        }
        return out;
    }
    case PnmFormat::P3:
    case PnmFormat::P6: {
        const auto* rgb = std::get_if<RgbImage>(&image);
        if (!rgb)
            raise(ErrorCode::Parameter, "pixmap formats require an RGB image");
        int w = rgb->r.width, h = rgb->r.height;
        if (rgb->g.width != w || rgb->g.height != h || rgb->b.width != w || rgb->b.height != h)
            raise(ErrorCode::Dimension, "RGB planes must share dimensions");
        auto out = header(format == PnmFormat::P3 ? '3' : '6', w, h, true);
        size_t pixels = static_cast<size_t>(w) * h;
        if (format == PnmFormat::P6) {
            for (size_t i = 0; i < pixels; i++) {
                out.push_back(rgb->r.samples[i]);
                out.push_back(rgb->g.samples[i]);
                out.push_back(rgb->b.samples[i]);
            }
        } else {
            for (size_t i = 0; i < pixels; i++) {
                std::string triple = std::to_string(rgb->r.samples[i]) + " " +
                                     std::to_string(rgb->g.samples[i]) + " " +
                                     std::to_string(rgb->b.samples[i]) + "\n";
                out.insert(out.end(), triple.begin(), triple.end());
            }
        }
        return out;
    }
    }
    raise(ErrorCode::Internal, "unreachable PNM format");
}

// ---- color conversion ----

namespace {

uint8_t clamp_round(double v) {
    return static_cast<uint8_t>(std::clamp(std::lround(v), 0l, 255l));
}

} // namespace

Ycbcr rgb_to_ycbcr(uint8_t r, uint8_t g, uint8_t b) {
    return {clamp_round(0.299 * r + 0.587 * g + 0.114 * b),
            clamp_round(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b),
            clamp_round(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b)};
}

Rgb ycbcr_to_rgb(uint8_t y, uint8_t cb, uint8_t cr) {
    double yd = y, cbd = cb - 128.0, crd = cr - 128.0;
    return {clamp_round(yd + 1.402 * crd),
            clamp_round(yd - 0.344136 * cbd - 0.714136 * crd),
            clamp_round(yd + 1.772 * cbd)};
}

} // namespace vidmark
