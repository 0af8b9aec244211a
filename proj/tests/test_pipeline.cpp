#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include "synth.hpp"
#include "vidmark/error.hpp"
#include "vidmark/pipeline.hpp"

using namespace vidmark;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::path("pipeline_test_tmp") / std::to_string(::getpid())) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path.parent_path()); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("scheme names round trip") {
    for (Scheme s : {Scheme::Block, Scheme::Diagonal, Scheme::DwtBlock})
        CHECK(scheme_from_name(scheme_name(s)) == s);
    CHECK(scheme_from_name("dwt_block") == Scheme::DwtBlock);
    CHECK_THROWS_AS(scheme_from_name("fourier"), Error);
}

TEST_CASE("wmref text format preserves full precision") {
    DiagonalReference ref;
    ref.scheme = Scheme::Diagonal;
    ref.delta = 16.0;
    ref.entries.push_back({4, {16468.652608616783, 1.0 / 3.0, 2.0592756841672481e-12}});
    ref.entries.push_back({17, {1.0}});

    std::string text = wmref_to_text(ref);
    CHECK(text.rfind("WMREF1 diagonal 16", 0) == 0);

    DiagonalReference back = wmref_from_text(text);
    CHECK(back.scheme == Scheme::Diagonal);
    CHECK(back.delta == 16.0);
    REQUIRE(back.entries.size() == 2);
    CHECK(back.entries[0].frame_index == 4);
    REQUIRE(back.entries[0].values.size() == 3);
    for (size_t i = 0; i < 3; i++)
        CHECK(back.entries[0].values[i] == ref.entries[0].values[i]);  // bit-exact
    CHECK(back.entries[1].frame_index == 17);

    CHECK_THROWS_AS(wmref_from_text("WMREF2 block 16\n"), Error);
    CHECK_THROWS_AS(wmref_from_text("WMREF1 diagonal 16\n3 5 1.0 2.0\n"), Error);
}

TEST_CASE("video and watermark files round trip") {
    TempDir tmp;
    VideoSequence seq = synth::smooth_video(3, 32, 32, 21);
    save_video(tmp.file("clip.y4m"), seq);
    CHECK(load_video(tmp.file("clip.y4m")) == seq);

    WatermarkImage mark = synth::test_mark(5, 9);
    save_watermark(tmp.file("mark.pbm"), mark);
    CHECK(load_watermark(tmp.file("mark.pbm")) == mark);

    CHECK_THROWS_AS(load_video(tmp.file("missing.y4m")), Error);

    // a graymap is not a valid watermark source
    write_file(tmp.file("gray.pgm"), write_pnm(Plane(2, 2, 9), PnmFormat::P5));
    CHECK_THROWS_AS(load_watermark(tmp.file("gray.pgm")), Error);
}

TEST_CASE("embed_file/extract_file with the trial ledger") {
    TempDir tmp;
    save_video(tmp.file("in.y4m"), synth::smooth_video(6, 96, 96, 33));
    save_watermark(tmp.file("mark.pbm"), synth::test_mark(4, 4));

    KeyMaterial key = derive_key("file-key");
    EmbedConfig cfg;
    EmbedFileResult embedded = embed_file(tmp.file("in.y4m"), tmp.file("wm.y4m"),
                                          tmp.file("mark.pbm"), key, cfg);
    CHECK(embedded.capacity == 144);
    CHECK(embedded.payload_bits == 80);
    CHECK(embedded.selected_frames.size() == 1);
    CHECK(embedded.mean_psnr >= 38.0);
    CHECK(embedded.sidecar_path.empty());

    ExtractFileResult out =
        extract_file(tmp.file("wm.y4m"), tmp.file("rec.pbm"), key, cfg,
                     tmp.file("trials.txt"), {}, "", tmp.file("mark.pbm"));
    CHECK(out.report.has_mark_metrics);
    CHECK(out.report.ber == 0.0);
    CHECK(out.report.nc == 1.0);
    CHECK(load_watermark(tmp.file("rec.pbm")) == synth::test_mark(4, 4));

    // wrong key: auth error recorded in the ledger
    KeyMaterial wrong = derive_key("not-it");
    for (int i = 1; i <= 3; i++)
        CHECK_THROWS_AS(extract_file(tmp.file("wm.y4m"), tmp.file("rec.pbm"), wrong, cfg,
                                     tmp.file("trials.txt")),
                        Error);
    std::vector<uint8_t> wm_bytes = read_file(tmp.file("wm.y4m"));
    TrialState state = load_trial_state(tmp.file("trials.txt"), asset_digest(wm_bytes));
    CHECK(state.failures == 3);
    CHECK(state.locked);

    // locked: even the right key reports lockout now
    try {
        extract_file(tmp.file("wm.y4m"), tmp.file("rec.pbm"), key, cfg,
                     tmp.file("trials.txt"));
        FAIL("expected lockout");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Lockout);
    }
}

TEST_CASE("embed_file writes the diagonal sidecar") {
    TempDir tmp;
    save_video(tmp.file("in.y4m"), synth::spectral_video(4, 96, 96, 1234));
    save_watermark(tmp.file("mark.pbm"), synth::test_mark(4, 4));

    KeyMaterial key = derive_key("diag-key");
    EmbedConfig cfg;
    cfg.scheme = Scheme::Diagonal;
    EmbedFileResult embedded = embed_file(tmp.file("in.y4m"), tmp.file("wm.y4m"),
                                          tmp.file("mark.pbm"), key, cfg);
    CHECK(embedded.sidecar_path == tmp.file("wm.y4m") + ".wmref");
    DiagonalReference ref = load_wmref(embedded.sidecar_path);
    CHECK(ref.entries.size() == embedded.selected_frames.size());

    ExtractFileResult out =
        extract_file(tmp.file("wm.y4m"), tmp.file("rec.pbm"), key, cfg,
                     tmp.file("trials.txt"), std::pair{4, 4}, embedded.sidecar_path,
                     tmp.file("mark.pbm"));
    CHECK(out.report.ber == 0.0);

    // the semi-blind guard fires without a sidecar
    try {
        extract_file(tmp.file("wm.y4m"), tmp.file("rec.pbm"), key, cfg,
                     tmp.file("trials.txt"));
        FAIL("expected semi-blind error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SemiBlind);
    }
}

TEST_CASE("attack_file reports the surviving frame count") {
    TempDir tmp;
    save_video(tmp.file("in.y4m"), synth::smooth_video(5, 32, 32, 3));
    AttackSpec spec;
    spec.kind = AttackKind::FrameDrop;
    spec.drop_indices = {0, 2};
    CHECK(attack_file(tmp.file("in.y4m"), tmp.file("out.y4m"), spec) == 3);
    CHECK(load_video(tmp.file("out.y4m")).frames.size() == 3);
}

TEST_CASE("default trials path honors the environment override") {
    ::unsetenv("WM_TRIALS_PATH");
    CHECK(default_trials_path() == "./.wm_trials");
    ::setenv("WM_TRIALS_PATH", "/tmp/custom_trials", 1);
    CHECK(default_trials_path() == "/tmp/custom_trials");
    ::unsetenv("WM_TRIALS_PATH");
}
