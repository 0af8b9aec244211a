#include "vidmark/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vidmark/error.hpp"

namespace vidmark {

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols, a.rows);
    for (int r = 0; r < a.rows; r++)
        for (int c = 0; c < a.cols; c++)
            t.at(c, r) = a.at(r, c);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        raise(ErrorCode::Dimension, "matmul shape mismatch");
    Matrix out(a.rows, b.cols);
    for (int r = 0; r < a.rows; r++)
        for (int k = 0; k < a.cols; k++) {
            double ark = a.at(r, k);
            if (ark == 0.0) continue;
            for (int c = 0; c < b.cols; c++)
                out.at(r, c) += ark * b.at(k, c);
        }
    return out;
}

double frobenius_norm(const Matrix& a) {
    double sum = 0.0;
    for (double v : a.data) sum += v * v;
    return std::sqrt(sum);
}

namespace {

constexpr double kRotationTol = 1e-12;
constexpr int kMaxSweeps = 30;

void check_valid(const Matrix& a) {
    if (a.rows < 1 || a.cols < 1)
        raise(ErrorCode::Domain, "svd requires a non-empty matrix");
    if (a.data.size() != static_cast<size_t>(a.rows) * a.cols)
        raise(ErrorCode::Dimension, "matrix data length does not match shape");
    for (double v : a.data)
        if (!std::isfinite(v))
            raise(ErrorCode::Domain, "svd input contains a non-finite entry");
}

double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double sum = 0.0;
    for (size_t i = 0; i < x.size(); i++) sum += x[i] * y[i];
    return sum;
}

void rotate(std::vector<double>& p, std::vector<double>& q, double c, double s) {
    for (size_t i = 0; i < p.size(); i++) {
        double pi = p[i], qi = q[i];
        p[i] = c * pi - s * qi;
        q[i] = s * pi + c * qi;
    }
}

// Orthogonalizes the columns of w in place by plane rotations, mirroring
// every rotation into v. On return the columns of w are pairwise
// orthogonal and v holds the accumulated right factor.
void jacobi_orthogonalize(std::vector<std::vector<double>>& w,
                          std::vector<std::vector<double>>& v) {
    const int n = static_cast<int>(w.size());
    for (int sweep = 0; sweep < kMaxSweeps; sweep++) {
        int rotations = 0;
        for (int p = 0; p < n - 1; p++)
            for (int q = p + 1; q < n; q++) {
                double app = dot(w[p], w[p]);
                double aqq = dot(w[q], w[q]);
                double apq = dot(w[p], w[q]);
                if (std::abs(apq) <= kRotationTol * std::sqrt(app * aqq))
                    continue;
                double zeta = (aqq - app) / (2.0 * apq);
                double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                rotate(w[p], w[q], c, s);
                rotate(v[p], v[q], c, s);
                rotations++;
            }
        if (rotations == 0) return;
    }
}

// Fills a zero-norm left column with a unit vector orthogonal to all
// other columns: the standard basis candidate with the largest residual
// after Gram-Schmidt, re-orthogonalized once for stability.
void complete_column(std::vector<std::vector<double>>& u, int target) {
    const size_t m = u[target].size();
    auto orthogonalize = [&](std::vector<double>& e) {
        for (size_t j = 0; j < u.size(); j++) {
            if (static_cast<int>(j) == target) continue;
            double proj = dot(e, u[j]);
            for (size_t i = 0; i < m; i++) e[i] -= proj * u[j][i];
        }
        return std::sqrt(dot(e, e));
    };

    std::vector<double> best;
    double best_norm = 0.0;
    for (size_t cand = 0; cand < m; cand++) {
        std::vector<double> e(m, 0.0);
        e[cand] = 1.0;
        double norm = orthogonalize(e);
        if (norm > best_norm) {
            best_norm = norm;
            best = std::move(e);
        }
    }
    // the best residual is at least 1/sqrt(m) when a complement exists
    if (best_norm < 1e-6)
        raise(ErrorCode::Internal, "failed to complete an orthonormal basis");
    for (double& v : best) v /= best_norm;
    double norm = orthogonalize(best);
    for (size_t i = 0; i < m; i++) u[target][i] = best[i] / norm;
}

} // namespace

SvdFactors svd(const Matrix& a) {
    check_valid(a);
    const bool transposed = a.rows < a.cols;
    Matrix tall = transposed ? transpose(a) : a;
    const int m = tall.rows;
    const int n = tall.cols;

    std::vector<std::vector<double>> w(n, std::vector<double>(m));
    for (int r = 0; r < m; r++)
        for (int c = 0; c < n; c++)
            w[c][r] = tall.at(r, c);

    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (int c = 0; c < n; c++) v[c][c] = 1.0;

    jacobi_orthogonalize(w, v);

    std::vector<double> sigma(n);
    double max_norm = 0.0;
    for (int c = 0; c < n; c++) {
        sigma[c] = std::sqrt(dot(w[c], w[c]));
        max_norm = std::max(max_norm, sigma[c]);
    }

    // Columns below the numeric floor are exact zeros of the factorization;
    // their left vectors get replaced by an orthogonal completion.
    const double zero_floor = max_norm * 1e-300;
    std::vector<int> degenerate;
    for (int c = 0; c < n; c++) {
        if (sigma[c] > zero_floor && sigma[c] > 0.0) {
            for (int r = 0; r < m; r++) w[c][r] /= sigma[c];
        } else {
            sigma[c] = 0.0;
            degenerate.push_back(c);
        }
    }
    for (int c : degenerate) complete_column(w, c);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return sigma[x] > sigma[y]; });

    SvdFactors f;
    f.s.resize(n);
    std::vector<std::vector<double>>* left = transposed ? &v : &w;
    std::vector<std::vector<double>>* right = transposed ? &w : &v;
    const int left_rows = transposed ? n : m;
    const int right_rows = transposed ? m : n;
    f.u = Matrix(left_rows, n);
    f.v = Matrix(right_rows, n);

    for (int c = 0; c < n; c++) {
        int src = order[c];
        f.s[c] = sigma[src];

        // Sign convention: largest-magnitude entry of the u column positive.
        const std::vector<double>& ucol = (*left)[src];
        int peak = 0;
        for (int r = 1; r < left_rows; r++)
            if (std::abs(ucol[r]) > std::abs(ucol[peak])) peak = r;
        double flip = ucol[peak] < 0.0 ? -1.0 : 1.0;

        for (int r = 0; r < left_rows; r++) f.u.at(r, c) = flip * ucol[r];
        for (int r = 0; r < right_rows; r++) f.v.at(r, c) = flip * (*right)[src][r];
    }
    return f;
}

Matrix reconstruct(const SvdFactors& f) {
    const int m = f.u.rows;
    const int n = f.v.rows;
    const int k = f.u.cols;
    if (f.v.cols != k || static_cast<int>(f.s.size()) != k)
        raise(ErrorCode::Dimension, "inconsistent SVD factor shapes");
    Matrix out(m, n);
    for (int r = 0; r < m; r++)
        for (int j = 0; j < k; j++) {
            double scaled = f.u.at(r, j) * f.s[j];
            if (scaled == 0.0) continue;
            for (int c = 0; c < n; c++)
                out.at(r, c) += scaled * f.v.at(c, j);
        }
    return out;
}

double two_norm(const Matrix& a) {
    return svd(a).s[0];
}

} // namespace vidmark
