#ifndef VIDMARK_METRICS_HPP
#define VIDMARK_METRICS_HPP

#include <string>
#include <vector>

#include "vidmark/linalg.hpp"
#include "vidmark/media_io.hpp"

namespace vidmark {

// Quality/robustness report. psnr rows cover modified frames only;
// nc/ber are NaN until a reference watermark comparison is available.
struct MetricsReport {
    struct FrameRow {
        int frame = 0;
        double psnr_db = 0.0;
    };
    std::vector<FrameRow> rows;
    double mean_psnr = 0.0;
    double nc = 0.0;
    double ber = 0.0;
    bool has_mark_metrics = false;
    std::string status = "ok";
};

// 10*log10(255^2 / MSE); +infinity when the planes are identical.
double psnr(const Plane& a, const Plane& b);

// Mean luma PSNR over the listed frame indices.
MetricsReport psnr_report(const VideoSequence& original,
                          const VideoSequence& processed,
                          const std::vector<int>& frames);

// Bits mapped to +/-1, then normalized correlation in [-1, 1].
double nc(const WatermarkImage& a, const WatermarkImage& b);

// Fraction of differing bits in [0, 1].
double ber(const WatermarkImage& a, const WatermarkImage& b);

// Console block in the fixed 6-decimal layout: U, S (k x k diagonal),
// V, 2-norm, singular values.
std::string singular_report(const Matrix& a);

// CSV: "frame,psnr_db" rows, then "#aggregate,<mean>,<nc>,<ber>,<status>".
std::string to_csv(const MetricsReport& report);

// Standalone bar chart (one bar per label), written as a static SVG file.
std::string svg_bar_chart(const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& caption);

} // namespace vidmark

#endif
