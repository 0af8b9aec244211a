#include "vidmark/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "vidmark/error.hpp"

namespace vidmark {

double psnr(const Plane& a, const Plane& b) {
    if (a.width != b.width || a.height != b.height)
        raise(ErrorCode::Dimension, "psnr requires equal plane dimensions");
    double sum = 0.0;
    for (size_t i = 0; i < a.samples.size(); i++) {
        double d = static_cast<double>(a.samples[i]) - static_cast<double>(b.samples[i]);
        sum += d * d;
    }
    double mse = sum / static_cast<double>(a.samples.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

MetricsReport psnr_report(const VideoSequence& original, const VideoSequence& processed,
                          const std::vector<int>& frames) {
    if (original.width != processed.width || original.height != processed.height ||
        original.frames.size() != processed.frames.size())
        raise(ErrorCode::Dimension, "videos disagree in shape or frame count");
    MetricsReport report;
    double sum = 0.0;
    int finite = 0;
    bool any_inf = false;
    for (int f : frames) {
        if (f < 0 || f >= static_cast<int>(original.frames.size()))
            raise(ErrorCode::Parameter, "frame index out of range");
        double db = psnr(original.frames[f].y, processed.frames[f].y);
        report.rows.push_back({f, db});
        if (std::isinf(db))
            any_inf = true;
        else {
            sum += db;
            finite++;
        }
    }
    if (finite > 0)
        report.mean_psnr = sum / finite;
    else
        report.mean_psnr =
            any_inf ? std::numeric_limits<double>::infinity() : 0.0;
    return report;
}

double nc(const WatermarkImage& a, const WatermarkImage& b) {
    if (a.width != b.width || a.height != b.height)
        raise(ErrorCode::Dimension, "nc requires equal watermark dimensions");
    if (a.bits.empty())
        raise(ErrorCode::Parameter, "nc requires a non-empty watermark");
    long agree = 0;
    for (size_t i = 0; i < a.bits.size(); i++)
        agree += (a.bits[i] & 1) == (b.bits[i] & 1) ? 1 : -1;
    return static_cast<double>(agree) / static_cast<double>(a.bits.size());
}

double ber(const WatermarkImage& a, const WatermarkImage& b) {
    if (a.width != b.width || a.height != b.height)
        raise(ErrorCode::Dimension, "ber requires equal watermark dimensions");
    if (a.bits.empty())
        raise(ErrorCode::Parameter, "ber requires a non-empty watermark");
    size_t differ = 0;
    for (size_t i = 0; i < a.bits.size(); i++)
        if ((a.bits[i] & 1) != (b.bits[i] & 1)) differ++;
    return static_cast<double>(differ) / static_cast<double>(a.bits.size());
}

namespace {

std::string fixed6(double v) {
    if (std::abs(v) < 5e-7) v = 0.0;  // avoid "-0.000000"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void append_matrix(std::string& out, const Matrix& m) {
    for (int r = 0; r < m.rows; r++) {
        for (int c = 0; c < m.cols; c++) {
            out += "  ";
            out += fixed6(m.at(r, c));
        }
        out += "\n";
    }
}

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string singular_report(const Matrix& a) {
    SvdFactors f = svd(a);
    const int k = static_cast<int>(f.s.size());
    Matrix s_diag(k, k);
    for (int i = 0; i < k; i++) s_diag.at(i, i) = f.s[i];

    std::string out;
    out += "U =\n";
    append_matrix(out, f.u);
    out += "S =\n";
    append_matrix(out, s_diag);
    out += "V =\n";
    append_matrix(out, f.v);
    out += "2-norm = " + full_precision(f.s[0]) + "\n";
    out += "singular values =\n";
    for (int i = 0; i < k; i++) {
        out += "  ";
        out += fixed6(f.s[i]);
    }
    out += "\n";
    return out;
}

std::string to_csv(const MetricsReport& report) {
    std::string out = "frame,psnr_db\n";
    auto db_text = [](double v) {
        return std::isinf(v) ? std::string("inf") : fixed6(v);
    };
    for (const auto& row : report.rows)
        out += std::to_string(row.frame) + "," + db_text(row.psnr_db) + "\n";
    out += "#aggregate," + db_text(report.mean_psnr) + ",";
    if (report.has_mark_metrics)
        out += fixed6(report.nc) + "," + fixed6(report.ber);
    else
        out += ",";
    out += "," + report.status + "\n";
    return out;
}

std::string svg_bar_chart(const std::vector<std::string>& labels,
                          const std::vector<double>& values,
                          const std::string& caption) {
    if (labels.size() != values.size())
        raise(ErrorCode::Parameter, "label and value counts disagree");
    const int bar_w = 56, gap = 24, chart_h = 220, base_y = 260, left = 48;
    const int width = left + static_cast<int>(labels.size()) * (bar_w + gap) + gap;
    double peak = 1e-12;
    for (double v : values) peak = std::max(peak, v);

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      std::to_string(width) + "\" height=\"300\">\n";
    svg += "<text x=\"" + std::to_string(width / 2) +
           "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + caption + "</text>\n";
    svg += "<line x1=\"" + std::to_string(left - 8) + "\" y1=\"" + std::to_string(base_y) +
           "\" x2=\"" + std::to_string(width - gap / 2) + "\" y2=\"" +
           std::to_string(base_y) + "\" stroke=\"black\"/>\n";
    for (size_t i = 0; i < labels.size(); i++) {
        int h = static_cast<int>(std::lround(values[i] / peak * chart_h));
        int x = left + static_cast<int>(i) * (bar_w + gap);
        svg += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(base_y - h) +
               "\" width=\"" + std::to_string(bar_w) + "\" height=\"" + std::to_string(h) +
               "\" fill=\"#4878a8\"/>\n";
        svg += "<text x=\"" + std::to_string(x + bar_w / 2) + "\" y=\"" +
               std::to_string(base_y - h - 6) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + fixed6(values[i]) +
               "</text>\n";
        svg += "<text x=\"" + std::to_string(x + bar_w / 2) + "\" y=\"" +
               std::to_string(base_y + 16) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + labels[i] + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace vidmark
