#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <utility>

#include "vidmark/error.hpp"
#include "vidmark/linalg.hpp"
#include "vidmark/metrics.hpp"
#include "vidmark/pipeline.hpp"
#include "vidmark/transforms.hpp"
#include "vidmark/watermark.hpp"

namespace py = pybind11;
using namespace vidmark;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows[0].empty())
        raise(ErrorCode::Parameter, "matrix must be non-empty");
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); r++) {
        if (rows[r].size() != rows[0].size())
            raise(ErrorCode::Dimension, "ragged rows");
        for (size_t c = 0; c < rows[r].size(); c++)
            m.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
    }
    return m;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
    std::vector<std::vector<double>> rows(m.rows, std::vector<double>(m.cols));
    for (int r = 0; r < m.rows; r++)
        for (int c = 0; c < m.cols; c++) rows[r][c] = m.at(r, c);
    return rows;
}

EmbedConfig make_config(const std::string& scheme, double delta, int frames_per_scene,
                        double scene_threshold) {
    EmbedConfig cfg;
    cfg.scheme = scheme_from_name(scheme);
    cfg.delta = delta;
    cfg.frames_per_scene = frames_per_scene;
    cfg.scene_threshold = scene_threshold;
    return cfg;
}

} // namespace

PYBIND11_MODULE(_vidmark, m) {
    m.doc() = "SVD video watermarking toolkit";

    py::register_exception<Error>(m, "Error");

    // ---- keying ----
    m.def(
        "derive_key",
        [](const py::bytes& passphrase) {
            KeyMaterial key = derive_key(std::string(passphrase));
            return py::make_tuple(key.seed, key.check_tag);
        },
        py::arg("passphrase"), "Derive (seed, check_tag) from a passphrase.");
    m.def(
        "prng_next",
        [](uint64_t state) {
            uint64_t value = prng_next(state);
            return py::make_tuple(state, value);
        },
        py::arg("state"), "One splitmix64 step: returns (next_state, value).");
    m.def(
        "select_frames",
        [](uint64_t seed, int total_frames, int m_count) {
            return select_frames(KeyMaterial{seed, 0}, total_frames, m_count)
                .frame_indices;
        },
        py::arg("seed"), py::arg("total_frames"), py::arg("m"),
        "Stratified key-driven frame selection.");

    // ---- numerics ----
    m.def(
        "svd",
        [](const std::vector<std::vector<double>>& rows) {
            SvdFactors f = svd(matrix_from_rows(rows));
            return py::make_tuple(matrix_to_rows(f.u), f.s, matrix_to_rows(f.v));
        },
        py::arg("matrix"), "Thin SVD: returns (u, s, v) with a = u @ diag(s) @ v.T.");
    m.def(
        "two_norm",
        [](const std::vector<std::vector<double>>& rows) {
            return two_norm(matrix_from_rows(rows));
        },
        py::arg("matrix"));
    m.def(
        "singular_report",
        [](const std::vector<std::vector<double>>& rows) {
            return singular_report(matrix_from_rows(rows));
        },
        py::arg("matrix"));
    m.def(
        "haar_forward",
        [](const std::vector<std::vector<double>>& rows) {
            SubbandSet s = haar_forward(matrix_from_rows(rows));
            return py::make_tuple(matrix_to_rows(s.ll), matrix_to_rows(s.lh),
                                  matrix_to_rows(s.hl), matrix_to_rows(s.hh));
        },
        py::arg("plane"), "One orthonormal Haar level: returns (ll, lh, hl, hh).");
    m.def(
        "haar_inverse",
        [](const std::vector<std::vector<double>>& ll,
           const std::vector<std::vector<double>>& lh,
           const std::vector<std::vector<double>>& hl,
           const std::vector<std::vector<double>>& hh) {
            return matrix_to_rows(haar_inverse(SubbandSet{
                matrix_from_rows(ll), matrix_from_rows(lh), matrix_from_rows(hl),
                matrix_from_rows(hh)}));
        },
        py::arg("ll"), py::arg("lh"), py::arg("hl"), py::arg("hh"));
    m.def("qim_embed", &qim_embed, py::arg("value"), py::arg("bit"), py::arg("delta"));
    m.def("qim_extract", &qim_extract, py::arg("value"), py::arg("delta"));

    // ---- file pipeline ----
    m.def(
        "embed",
        [](const std::string& video_in, const std::string& video_out,
           const std::string& mark, const std::string& key, const std::string& scheme,
           double delta, int frames_per_scene, double scene_threshold) {
            EmbedFileResult r =
                embed_file(video_in, video_out, mark, derive_key(key),
                           make_config(scheme, delta, frames_per_scene, scene_threshold));
            py::dict out;
            out["capacity"] = r.capacity;
            out["payload_bits"] = r.payload_bits;
            out["selected_frames"] = r.selected_frames;
            out["mean_psnr"] = r.mean_psnr;
            out["sidecar"] = r.sidecar_path;
            return out;
        },
        py::arg("video_in"), py::arg("video_out"), py::arg("mark"), py::arg("key"),
        py::arg("scheme") = "block", py::arg("delta") = 16.0,
        py::arg("frames_per_scene") = 1, py::arg("scene_threshold") = 12.0);
    m.def(
        "extract",
        [](const std::string& video_in, const std::string& mark_out,
           const std::string& key, const std::string& scheme, double delta,
           int frames_per_scene, double scene_threshold, const std::string& trials,
           const std::string& sidecar, const std::string& reference,
           std::optional<std::pair<int, int>> dims) {
            ExtractFileResult r = extract_file(
                video_in, mark_out, derive_key(key),
                make_config(scheme, delta, frames_per_scene, scene_threshold), trials,
                dims, sidecar, reference);
            py::dict out;
            out["frames_used"] = r.frames_used;
            out["realigned"] = r.realigned;
            if (r.report.has_mark_metrics) {
                out["nc"] = r.report.nc;
                out["ber"] = r.report.ber;
            }
            return out;
        },
        py::arg("video_in"), py::arg("mark_out"), py::arg("key"),
        py::arg("scheme") = "block", py::arg("delta") = 16.0,
        py::arg("frames_per_scene") = 1, py::arg("scene_threshold") = 12.0,
        py::arg("trials") = "./.wm_trials", py::arg("sidecar") = "",
        py::arg("reference") = "", py::arg("dims") = py::none());
    m.def(
        "attack",
        [](const std::string& video_in, const std::string& video_out,
           const std::string& kind, double sigma, std::optional<std::vector<int>> rect,
           double factor, double degrees, double rate, std::vector<int> indices,
           int window, int quality, uint64_t seed) {
            AttackSpec spec;
            spec.sigma = sigma;
            spec.factor = factor;
            spec.degrees = degrees;
            spec.rate = rate;
            spec.drop_indices = std::move(indices);
            spec.window = window;
            spec.quality = quality;
            spec.seed = seed;
            if (rect) {
                if (rect->size() != 4)
                    raise(ErrorCode::Parameter, "rect expects [x, y, w, h]");
                spec.rect = {(*rect)[0], (*rect)[1], (*rect)[2], (*rect)[3]};
            }
            if (kind == "gaussian-noise") spec.kind = AttackKind::GaussianNoise;
            else if (kind == "blur") spec.kind = AttackKind::Blur;
            else if (kind == "crop") spec.kind = AttackKind::Crop;
            else if (kind == "resize") spec.kind = AttackKind::Resize;
            else if (kind == "rotate") spec.kind = AttackKind::Rotate;
            else if (kind == "frame-drop") spec.kind = AttackKind::FrameDrop;
            else if (kind == "frame-average") spec.kind = AttackKind::FrameAverage;
            else if (kind == "jpeg-quantize") spec.kind = AttackKind::JpegQuantize;
            else raise(ErrorCode::Parameter, "unknown attack kind '" + kind + "'");
            return attack_file(video_in, video_out, spec);
        },
        py::arg("video_in"), py::arg("video_out"), py::arg("kind"),
        py::arg("sigma") = 0.0, py::arg("rect") = py::none(), py::arg("factor") = 1.0,
        py::arg("degrees") = 0.0, py::arg("rate") = 0.0,
        py::arg("indices") = std::vector<int>{}, py::arg("window") = 1,
        py::arg("quality") = 50, py::arg("seed") = 0,
        "Apply one attack to a y4m file; returns the output frame count.");

    m.attr("__version__") = "0.1.0";
}
