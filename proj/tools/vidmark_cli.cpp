#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "vidmark/error.hpp"
#include "vidmark/pipeline.hpp"

using namespace vidmark;

namespace {

// Exit codes are a stable contract: 0 success, 2 usage/format,
// 3 authentication, 4 lockout, 5 internal.
int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::Auth: return 3;
    case ErrorCode::Lockout: return 4;
    case ErrorCode::Internal: return 5;
    default: return 2;
    }
}

struct KeyOptions {
    std::string passphrase;
    std::string key_file;
    bool passphrase_set = false;

    KeyMaterial resolve() const {
        if (passphrase_set && !key_file.empty())
            raise(ErrorCode::Parameter, "--key and --key-file are mutually exclusive");
        if (key_file.empty() && !passphrase_set)
            raise(ErrorCode::Parameter, "a key is required (--key or --key-file)");
        if (!key_file.empty()) {
            std::vector<uint8_t> bytes = read_file(key_file);
            return derive_key(std::string_view(
                reinterpret_cast<const char*>(bytes.data()), bytes.size()));
        }
        return derive_key(passphrase);
    }
};

void add_key_options(CLI::App* cmd, KeyOptions& key) {
    cmd->add_option("--key", key.passphrase, "key passphrase")
        ->each([&key](const std::string&) { key.passphrase_set = true; });
    cmd->add_option("--key-file", key.key_file, "file whose raw bytes form the key");
}

struct SchemeOptions {
    std::string scheme = "block";
    double delta = 16.0;
    int frames_per_scene = 1;
    double scene_threshold = 12.0;
    int realign_budget = 16;

    EmbedConfig resolve() const {
        EmbedConfig cfg;
        cfg.scheme = scheme_from_name(scheme);
        cfg.delta = delta;
        cfg.frames_per_scene = frames_per_scene;
        cfg.scene_threshold = scene_threshold;
        cfg.realign_budget = realign_budget;
        if (cfg.delta <= 0) raise(ErrorCode::Parameter, "--delta must be positive");
        if (cfg.frames_per_scene < 1)
            raise(ErrorCode::Parameter, "--frames-per-scene must be >= 1");
        return cfg;
    }
};

void add_scheme_options(CLI::App* cmd, SchemeOptions& opts) {
    cmd->add_option("--scheme", opts.scheme, "block | diagonal | dwt-block")
        ->default_val("block");
    cmd->add_option("--delta", opts.delta, "QIM step (diagonal strength = delta/1000)")
        ->default_val(16.0);
    cmd->add_option("--frames-per-scene", opts.frames_per_scene,
                    "host frames selected per scene")
        ->default_val(1);
    cmd->add_option("--scene-threshold", opts.scene_threshold,
                    "mean-abs luma difference declaring a cut")
        ->default_val(12.0);
    cmd->add_option("--realign-budget", opts.realign_budget,
                    "frame offsets scanned when the plan misses")
        ->default_val(16);
}

std::optional<std::pair<int, int>> parse_dims(const std::string& text) {
    if (text.empty()) return {};
    int w = 0, h = 0;
    if (std::sscanf(text.c_str(), "%dx%d", &w, &h) != 2 || w < 1 || h < 1)
        raise(ErrorCode::Parameter, "--dims expects WxH, e.g. 8x8");
    return std::pair{w, h};
}

Matrix load_matrix_text(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    std::string text(bytes.begin(), bytes.end());
    std::vector<std::vector<double>> rows;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        std::vector<double> row;
        const char* p = line.c_str();
        char* end = nullptr;
        for (;;) {
            double v = std::strtod(p, &end);
            if (end == p) break;
            row.push_back(v);
            p = end;
        }
        while (*p == ' ' || *p == '\t' || *p == '\r') p++;
        if (*p != '\0')
            raise(ErrorCode::BadFormat, "matrix file has a non-numeric token");
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) raise(ErrorCode::BadFormat, "matrix file is empty");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); r++) {
        if (rows[r].size() != rows[0].size())
            raise(ErrorCode::BadFormat,
                  "row " + std::to_string(r) + " has a different length");
        for (size_t c = 0; c < rows[r].size(); c++)
            m.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return m;
}

std::string fmt_db(double v) {
    if (std::isinf(v)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    write_file(path,
               std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

// ---- evaluate ----

AttackSpec sweep_spec(const std::string& kind, double param, uint64_t seed, int width,
                      int height) {
    AttackSpec spec;
    spec.seed = seed;
    if (kind == "gaussian-noise") {
        spec.kind = AttackKind::GaussianNoise;
        spec.sigma = param;
    } else if (kind == "blur") {
        spec.kind = AttackKind::Blur;
    } else if (kind == "jpeg-quantize") {
        spec.kind = AttackKind::JpegQuantize;
        spec.quality = static_cast<int>(param);
    } else if (kind == "resize") {
        spec.kind = AttackKind::Resize;
        spec.factor = param;
    } else if (kind == "rotate") {
        spec.kind = AttackKind::Rotate;
        spec.degrees = param;
    } else if (kind == "frame-drop") {
        spec.kind = AttackKind::FrameDrop;
        spec.rate = param;
    } else if (kind == "frame-average") {
        spec.kind = AttackKind::FrameAverage;
        spec.window = std::max(1, static_cast<int>(param));
    } else if (kind == "crop") {
        spec.kind = AttackKind::Crop;
        int rw = std::max(1, static_cast<int>(std::lround(width * param)));
        int rh = std::max(1, static_cast<int>(std::lround(height * param)));
        spec.rect = {(width - rw) / 2, (height - rh) / 2, rw, rh};
    } else {
        raise(ErrorCode::Parameter, "unknown attack kind '" + kind + "'");
    }
    return spec;
}

int run_evaluate(const std::string& original_path, const std::string& watermarked_path,
                 const std::string& mark_path, const std::string& extracted_path,
                 const std::string& csv_path, const std::string& svg_path,
                 const std::string& sweep, const std::vector<double>& params,
                 const KeyOptions& key_opts, const SchemeOptions& scheme_opts,
                 uint64_t seed) {
    VideoSequence original = load_video(original_path);
    VideoSequence watermarked = load_video(watermarked_path);
    if (original.width != watermarked.width || original.height != watermarked.height ||
        original.frames.size() != watermarked.frames.size())
        raise(ErrorCode::Dimension, "original and watermarked videos disagree in shape");

    if (sweep.empty()) {
        std::vector<int> modified;
        for (size_t f = 0; f < original.frames.size(); f++)
            if (!(original.frames[f] == watermarked.frames[f]))
                modified.push_back(static_cast<int>(f));
        MetricsReport report = psnr_report(original, watermarked, modified);
        if (modified.empty())
            report.mean_psnr = std::numeric_limits<double>::infinity();
        if (!mark_path.empty() && !extracted_path.empty()) {
            WatermarkImage mark = load_watermark(mark_path);
            WatermarkImage extracted = load_watermark(extracted_path);
            report.nc = nc(mark, extracted);
            report.ber = ber(mark, extracted);
            report.has_mark_metrics = true;
        }
        std::string csv = to_csv(report);
        if (!csv_path.empty())
            write_text(csv_path, csv);
        else
            std::fputs(csv.c_str(), stdout);
        std::printf("mean psnr: %s dB over %zu modified frames\n",
                    fmt_db(report.mean_psnr).c_str(), modified.size());
        return 0;
    }

    // sweep: attack the watermarked video per parameter, re-extract, report
    KeyMaterial key = key_opts.resolve();
    EmbedConfig cfg = scheme_opts.resolve();
    if (mark_path.empty())
        raise(ErrorCode::Parameter, "--sweep needs --mark as the reference watermark");
    WatermarkImage mark = load_watermark(mark_path);

    std::string csv = "attack,psnr_db,nc,ber,status\n";
    std::vector<std::string> labels;
    std::vector<double> bers;
    double psnr_sum = 0, nc_sum = 0, ber_sum = 0;
    int ok_count = 0;
    for (double param : params) {
        char label[64];
        std::snprintf(label, sizeof label, "%s:%g", sweep.c_str(), param);
        AttackSpec spec = sweep_spec(sweep, param, seed, original.width, original.height);
        VideoSequence attacked = apply_attack(watermarked, spec);

        double db = std::numeric_limits<double>::quiet_NaN();
        if (attacked.frames.size() == original.frames.size()) {
            std::vector<int> all;
            for (size_t f = 0; f < attacked.frames.size(); f++)
                all.push_back(static_cast<int>(f));
            db = psnr_report(original, attacked, all).mean_psnr;
        }

        double row_nc = 0.0, row_ber = 1.0;
        std::string status = "ok";
        try {
            ExtractOutcome out = extract_video(attacked, key, cfg);
            if (out.mark.width == mark.width && out.mark.height == mark.height) {
                row_nc = nc(mark, out.mark);
                row_ber = ber(mark, out.mark);
            } else {
                status = "dims-mismatch";
            }
        } catch (const Error& e) {
            status = exit_code_for(e.code()) == 3 ? "auth-failed" : "error";
        }
        char row[160];
        std::snprintf(row, sizeof row, "%s,%s,%.6f,%.6f,%s\n", label,
                      std::isnan(db) ? "" : fmt_db(db).c_str(), row_nc, row_ber,
                      status.c_str());
        csv += row;
        labels.push_back(label);
        bers.push_back(row_ber);
        if (status == "ok") {
            ok_count++;
            if (!std::isnan(db) && !std::isinf(db)) psnr_sum += db;
            nc_sum += row_nc;
            ber_sum += row_ber;
        }
    }
    char footer[160];
    if (ok_count > 0)
        std::snprintf(footer, sizeof footer, "#aggregate,%.2f,%.6f,%.6f,%d/%zu ok\n",
                      psnr_sum / ok_count, nc_sum / ok_count, ber_sum / ok_count,
                      ok_count, params.size());
    else
        std::snprintf(footer, sizeof footer, "#aggregate,,,,0/%zu ok\n", params.size());
    csv += footer;

    if (!csv_path.empty())
        write_text(csv_path, csv);
    else
        std::fputs(csv.c_str(), stdout);
    if (!svg_path.empty())
        write_text(svg_path, svg_bar_chart(labels, bers, "BER per attack"));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SVD video watermarking toolkit"};
    app.require_subcommand(1);

    // ---- embed ----
    std::string in_path, out_path, mark_path;
    KeyOptions key_opts;
    SchemeOptions scheme_opts;
    CLI::App* embed = app.add_subcommand("embed", "embed a watermark into a y4m video");
    embed->add_option("--in", in_path, "input .y4m")->required();
    embed->add_option("--out", out_path, "output .y4m")->required();
    embed->add_option("--mark", mark_path, "watermark bitmap (P1/P4 PNM)")->required();
    add_key_options(embed, key_opts);
    add_scheme_options(embed, scheme_opts);

    // ---- extract ----
    std::string dims_text, sidecar_path, reference_path, trials_path;
    CLI::App* extract = app.add_subcommand("extract", "recover a watermark");
    extract->add_option("--in", in_path, "watermarked .y4m")->required();
    extract->add_option("--out", out_path, "recovered watermark (P4 PNM)")->required();
    add_key_options(extract, key_opts);
    add_scheme_options(extract, scheme_opts);
    extract->add_option("--dims", dims_text, "expected watermark WxH");
    extract->add_option("--sidecar", sidecar_path, ".wmref file (diagonal scheme)");
    extract->add_option("--reference", reference_path,
                        "original watermark, prints NC/BER");
    extract->add_option("--trials", trials_path,
                        "trial-state file (default $WM_TRIALS_PATH or ./.wm_trials)");

    // ---- attack ----
    std::string kind;
    AttackSpec attack_spec;
    std::vector<int> rect_vals;
    CLI::App* attack = app.add_subcommand("attack", "degrade a video deterministically");
    attack->add_option("--in", in_path, "input .y4m")->required();
    attack->add_option("--out", out_path, "output .y4m")->required();
    attack
        ->add_option("--kind", kind,
                     "gaussian-noise | blur | crop | resize | rotate | frame-drop | "
                     "frame-average | jpeg-quantize")
        ->required();
    attack->add_option("--sigma", attack_spec.sigma, "noise standard deviation");
    attack->add_option("--rect", rect_vals, "crop rectangle x y w h")->expected(4);
    attack->add_option("--factor", attack_spec.factor, "resize factor in (0,1]");
    attack->add_option("--degrees", attack_spec.degrees, "rotation angle");
    attack->add_option("--rate", attack_spec.rate, "frame drop probability");
    attack->add_option("--indices", attack_spec.drop_indices, "frames to drop");
    attack->add_option("--window", attack_spec.window, "averaging window");
    attack->add_option("--quality", attack_spec.quality, "jpeg quality 1..100");
    attack->add_option("--seed", attack_spec.seed, "prng seed for stochastic kinds");

    // ---- evaluate ----
    std::string original_path, watermarked_path, extracted_path, csv_path, svg_path,
        sweep_kind;
    std::vector<double> sweep_params;
    uint64_t eval_seed = 0;
    CLI::App* evaluate = app.add_subcommand("evaluate", "quality/robustness report");
    evaluate->add_option("--original", original_path, "pristine .y4m")->required();
    evaluate->add_option("--watermarked", watermarked_path, "watermarked .y4m")
        ->required();
    evaluate->add_option("--mark", mark_path, "reference watermark");
    evaluate->add_option("--extracted", extracted_path, "recovered watermark");
    evaluate->add_option("--csv", csv_path, "CSV output path (default stdout)");
    evaluate->add_option("--svg", svg_path, "SVG bar chart output path");
    evaluate->add_option("--sweep", sweep_kind, "attack family to sweep");
    evaluate->add_option("--params", sweep_params, "sweep parameter grid");
    evaluate->add_option("--seed", eval_seed, "attack seed for the sweep");
    add_key_options(evaluate, key_opts);
    add_scheme_options(evaluate, scheme_opts);

    // ---- svd ----
    CLI::App* svd_cmd = app.add_subcommand("svd", "print the factorization of a matrix");
    svd_cmd->add_option("--in", in_path, "text matrix, one row per line")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(embed)) {
            EmbedFileResult result = embed_file(in_path, out_path, mark_path,
                                                key_opts.resolve(), scheme_opts.resolve());
            std::printf("capacity: %d bits\n", result.capacity);
            std::printf("payload: %d bits\n", result.payload_bits);
            std::printf("selected frames:");
            for (int f : result.selected_frames) std::printf(" %d", f);
            std::printf("\nmean psnr: %s dB\n", fmt_db(result.mean_psnr).c_str());
            if (!result.sidecar_path.empty())
                std::printf("sidecar: %s\n", result.sidecar_path.c_str());
            return 0;
        }
        if (app.got_subcommand(extract)) {
            if (trials_path.empty()) trials_path = default_trials_path();
            ExtractFileResult result = extract_file(
                in_path, out_path, key_opts.resolve(), scheme_opts.resolve(), trials_path,
                parse_dims(dims_text), sidecar_path, reference_path);
            std::printf("frames used:");
            for (int f : result.frames_used) std::printf(" %d", f);
            std::printf("\nrealigned: %s\n", result.realigned ? "yes" : "no");
            if (result.report.has_mark_metrics)
                std::printf("nc: %.6f\nber: %.6f\n", result.report.nc, result.report.ber);
            return 0;
        }
        if (app.got_subcommand(attack)) {
            if (rect_vals.size() == 4)
                attack_spec.rect = {rect_vals[0], rect_vals[1], rect_vals[2],
                                    rect_vals[3]};
            if (kind == "gaussian-noise") attack_spec.kind = AttackKind::GaussianNoise;
            else if (kind == "blur") attack_spec.kind = AttackKind::Blur;
            else if (kind == "crop") attack_spec.kind = AttackKind::Crop;
            else if (kind == "resize") attack_spec.kind = AttackKind::Resize;
            else if (kind == "rotate") attack_spec.kind = AttackKind::Rotate;
            else if (kind == "frame-drop") attack_spec.kind = AttackKind::FrameDrop;
            else if (kind == "frame-average") attack_spec.kind = AttackKind::FrameAverage;
            else if (kind == "jpeg-quantize") attack_spec.kind = AttackKind::JpegQuantize;
            else raise(ErrorCode::Parameter, "unknown attack kind '" + kind + "'");
            int frames = attack_file(in_path, out_path, attack_spec);
            std::printf("output frames: %d\n", frames);
            return 0;
        }
        if (app.got_subcommand(evaluate)) {
            return run_evaluate(original_path, watermarked_path, mark_path,
                                extracted_path, csv_path, svg_path, sweep_kind,
                                sweep_params, key_opts, scheme_opts, eval_seed);
        }
        if (app.got_subcommand(svd_cmd)) {
            std::fputs(singular_report(load_matrix_text(in_path)).c_str(), stdout);
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 5;
    }
    return 2;
}
