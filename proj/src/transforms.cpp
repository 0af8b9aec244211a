#include "vidmark/transforms.hpp"

#include "vidmark/error.hpp"

namespace vidmark {

SubbandSet haar_forward(const Matrix& p) {
    if (p.rows < 2 || p.cols < 2 || p.rows % 2 || p.cols % 2)
        raise(ErrorCode::Dimension, "Haar transform requires even dimensions");
    const int hr = p.rows / 2;
    const int hc = p.cols / 2;
    SubbandSet s{Matrix(hr, hc), Matrix(hr, hc), Matrix(hr, hc), Matrix(hr, hc)};
    for (int r = 0; r < hr; r++)
        for (int c = 0; c < hc; c++) {
            double a = p.at(2 * r, 2 * c);
            double b = p.at(2 * r, 2 * c + 1);
            double cc = p.at(2 * r + 1, 2 * c);
            double d = p.at(2 * r + 1, 2 * c + 1);
            s.ll.at(r, c) = (a + b + cc + d) / 2.0;
            s.lh.at(r, c) = (a - b + cc - d) / 2.0;
            s.hl.at(r, c) = (a + b - cc - d) / 2.0;
            s.hh.at(r, c) = (a - b - cc + d) / 2.0;
        }
    return s;
}

Matrix haar_inverse(const SubbandSet& s) {
    const int hr = s.ll.rows;
    const int hc = s.ll.cols;
    for (const Matrix* band : {&s.lh, &s.hl, &s.hh})
        if (band->rows != hr || band->cols != hc)
            raise(ErrorCode::Dimension, "subband dimensions disagree");
    Matrix p(hr * 2, hc * 2);
    for (int r = 0; r < hr; r++)
        for (int c = 0; c < hc; c++) {
            double ll = s.ll.at(r, c);
            double lh = s.lh.at(r, c);
            double hl = s.hl.at(r, c);
            double hh = s.hh.at(r, c);
            p.at(2 * r, 2 * c) = (ll + lh + hl + hh) / 2.0;
            p.at(2 * r, 2 * c + 1) = (ll - lh + hl - hh) / 2.0;
            p.at(2 * r + 1, 2 * c) = (ll + lh - hl - hh) / 2.0;
            p.at(2 * r + 1, 2 * c + 1) = (ll - lh - hl + hh) / 2.0;
        }
    return p;
}

} // namespace vidmark
