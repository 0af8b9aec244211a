#ifndef VIDMARK_LINALG_HPP
#define VIDMARK_LINALG_HPP

#include <vector>

namespace vidmark {

// Dense row-major matrix of doubles.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

    double at(int r, int c) const {
        return data[static_cast<size_t>(r) * cols + c];
    }
    double& at(int r, int c) {
        return data[static_cast<size_t>(r) * cols + c];
    }

    bool operator==(const Matrix&) const = default;
};

// Thin SVD triple: a = u * diag(s) * v^T with k = min(rows, cols).
// s is non-negative and non-increasing; u and v have orthonormal columns.
struct SvdFactors {
    Matrix u;               // m x k
    std::vector<double> s;  // k
    Matrix v;               // n x k
};

// One-sided Jacobi SVD on the taller orientation. Deterministic: repeated
// calls on the same input produce bitwise-identical factors. The sign
// convention forces the largest-magnitude entry of each u column positive.
SvdFactors svd(const Matrix& a);

// Returns u * diag(s) * v^T.
Matrix reconstruct(const SvdFactors& f);

// Largest singular value.
double two_norm(const Matrix& a);

// Helpers shared by the transforms and watermark modules.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
double frobenius_norm(const Matrix& a);

} // namespace vidmark

#endif
