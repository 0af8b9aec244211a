// CLI contract tests. The binary under test and a scratch directory come
// from the VIDMARK_CLI / VIDMARK_WORK environment variables (set by ctest).

#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <string>

#include "proc.hpp"
#include "synth.hpp"
#include "vidmark/pipeline.hpp"

using namespace vidmark;
using vidmark::testproc::run_command;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_work;

testproc::CommandResult cli(const std::string& args) {
    return run_command(g_cli + " " + args);
}

std::string path_of(const std::string& name) {
    return (g_work / name).string();
}

struct Fixtures {
    std::string video = path_of("cli_in.y4m");
    std::string odd_video = path_of("cli_odd.y4m");
    std::string mark = path_of("cli_mark.pbm");
    std::string big_mark = path_of("cli_big.pbm");
    std::string marked = path_of("cli_wm.y4m");

    Fixtures() {
        save_video(video, synth::smooth_video(6, 128, 128, 42));
        VideoSequence odd = synth::smooth_video(2, 129, 64, 42);
        odd.subsampling = Subsampling::C444;
        for (auto& f : odd.frames) {
            f.subsampling = Subsampling::C444;
            f.cb = Plane(129, 64, 128);
            f.cr = Plane(129, 64, 128);
        }
        save_video(odd_video, odd);
        save_watermark(mark, synth::test_mark());
        save_watermark(big_mark, WatermarkImage(100, 100));
    }
};

Fixtures& fixtures() {
    static Fixtures f;
    return f;
}

} // namespace

TEST_CASE("embed happy path reports capacity and leaves the input untouched") {
    Fixtures& fx = fixtures();
    std::vector<uint8_t> before = read_file(fx.video);
    auto r = cli("embed --in " + fx.video + " --out " + fx.marked + " --mark " +
                 fx.mark + " --key k --scheme block --delta 16");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("capacity: 256 bits") != std::string::npos);
    CHECK(r.output.find("selected frames:") != std::string::npos);
    CHECK(r.output.find("mean psnr:") != std::string::npos);
    CHECK(read_file(fx.video) == before);
    CHECK(fs::exists(fx.marked));
}

TEST_CASE("embed rejects an oversized watermark with a capacity diagnostic") {
    Fixtures& fx = fixtures();
    auto r = cli("embed --in " + fx.video + " --out " + path_of("x.y4m") + " --mark " +
                 fx.big_mark + " --key k");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("capacity") != std::string::npos);
}

TEST_CASE("dwt-block refuses odd dimensions") {
    Fixtures& fx = fixtures();
    auto r = cli("embed --in " + fx.odd_video + " --out " + path_of("x.y4m") +
                 " --mark " + fx.mark + " --key k --scheme dwt-block");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("even") != std::string::npos);
}

TEST_CASE("extract round trip, then diagonal without sidecar") {
    Fixtures& fx = fixtures();
    auto r = cli("extract --in " + fx.marked + " --out " + path_of("cli_rec.pbm") +
                 " --key k --reference " + fx.mark + " --trials " +
                 path_of("cli_trials.txt"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("ber: 0.000000") != std::string::npos);
    CHECK(load_watermark(path_of("cli_rec.pbm")) == synth::test_mark());

    r = cli("extract --in " + fx.marked + " --out " + path_of("cli_rec.pbm") +
            " --key k --scheme diagonal --trials " + path_of("cli_trials.txt"));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("sidecar") != std::string::npos);
}

TEST_CASE("attack subcommand surface") {
    Fixtures& fx = fixtures();
    auto r = cli("attack --in " + fx.marked + " --out " + path_of("cli_atk.y4m") +
                 " --kind frame-drop --rate 0.5 --seed 7");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("output frames:") != std::string::npos);

    r = cli("attack --in " + fx.marked + " --out " + path_of("cli_atk2.y4m") +
            " --kind melt");
    CHECK(r.exit_code == 2);

    std::vector<uint8_t> before = read_file(fx.marked);
    cli("attack --in " + fx.marked + " --out " + path_of("cli_atk3.y4m") +
        " --kind blur");
    CHECK(read_file(fx.marked) == before);
}

TEST_CASE("evaluate identical videos reports infinite psnr") {
    Fixtures& fx = fixtures();
    auto r = cli("evaluate --original " + fx.video + " --watermarked " + fx.video);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("inf") != std::string::npos);
}

TEST_CASE("evaluate sweep writes one row per parameter plus the aggregate") {
    Fixtures& fx = fixtures();
    std::string csv_path = path_of("cli_sweep.csv");
    auto r = cli("evaluate --original " + fx.video + " --watermarked " + fx.marked +
                 " --mark " + fx.mark + " --key k --sweep gaussian-noise --params 0 1 "
                 "2 3 --seed 5 --csv " + csv_path + " --svg " + path_of("cli_sweep.svg"));
    CHECK(r.exit_code == 0);
    std::vector<uint8_t> csv = read_file(csv_path);
    std::string text(csv.begin(), csv.end());
    int rows = 0;
    for (size_t pos = text.find("gaussian-noise:"); pos != std::string::npos;
         pos = text.find("gaussian-noise:", pos + 1))
        rows++;
    CHECK(rows == 4);
    CHECK(text.find("#aggregate") != std::string::npos);
    CHECK(fs::exists(path_of("cli_sweep.svg")));
}

TEST_CASE("evaluate rejects mismatched videos") {
    Fixtures& fx = fixtures();
    auto r = cli("evaluate --original " + fx.video + " --watermarked " + fx.odd_video);
    CHECK(r.exit_code == 2);
}

TEST_CASE("svd subcommand prints the fixture factorization") {
    Matrix a = synth::fixture_matrix_a();
    std::ofstream out(path_of("cli_matrix.txt"));
    out << std::setprecision(17);
    for (int r = 0; r < a.rows; r++) {
        for (int c = 0; c < a.cols; c++) out << (c ? " " : "") << a.at(r, c);
        out << "\n";
    }
    out.close();
    auto r = cli("svd --in " + path_of("cli_matrix.txt"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("15.423896") != std::string::npos);

    std::ofstream one(path_of("cli_one.txt"));
    one << "7\n";
    one.close();
    r = cli("svd --in " + path_of("cli_one.txt"));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("7.000000") != std::string::npos);

    std::ofstream ragged(path_of("cli_ragged.txt"));
    ragged << "1 2\n3\n";
    ragged.close();
    CHECK(cli("svd --in " + path_of("cli_ragged.txt")).exit_code == 2);
}

int run(int argc, char** argv) {
    const char* cli_env = std::getenv("VIDMARK_CLI");
    const char* work_env = std::getenv("VIDMARK_WORK");
    if (!cli_env || !work_env) {
        std::fprintf(stderr,
                     "cli_tests needs VIDMARK_CLI and VIDMARK_WORK in the "
                     "environment\n");
        return 2;
    }
    g_cli = cli_env;
    g_work = work_env;
    fs::create_directories(g_work);

    doctest::Context context;
    context.applyCommandLine(argc, argv);
    return context.run();
}

int main(int argc, char** argv) {
    return run(argc, argv);
}
