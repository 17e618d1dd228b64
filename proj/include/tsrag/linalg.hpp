#ifndef TSRAG_LINALG_HPP
#define TSRAG_LINALG_HPP

#include <cstddef>
#include <vector>

#include "tsrag/error.hpp"

namespace tsrag {

using Vec = std::vector<double>;

// Row-major dense matrix. Small and deliberately dumb: every model in this
// project fits in a handful of these and the shapes are fixed at config time.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double* row(std::size_t i) { return data.data() + i * cols; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

// out(r x B.cols) = A(r x n) * B(n x B.cols)
Mat matmul(const Mat& a, const Mat& b);
// out = A^T * B  (A is n x r, B is n x c -> out r x c)
Mat matmul_tn(const Mat& a, const Mat& b);
// out = A * B^T  (A is r x n, B is c x n -> out r x c)
Mat matmul_nt(const Mat& a, const Mat& b);

// y(m) = x(n) * A(n x m)
Vec vecmat(const Vec& x, const Mat& a);
// y(n) = A(n x m) * x(m)
Vec matvec(const Mat& a, const Vec& x);

// Adds bias to every row of m in place.
void add_row_bias(Mat& m, const Vec& bias);
// Column sums of m (length m.cols).
Vec col_sums(const Mat& m);

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);

// In-place row softmax.
void softmax_rows(Mat& m);
// Softmax of a vector.
Vec softmax(const Vec& v);

inline void require_len(const Vec& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw TsragError(ErrorCategory::DIM_MISMATCH,
                         std::string(what) + ": expected length " + std::to_string(n) +
                             ", got " + std::to_string(v.size()));
    }
}

} // namespace tsrag

#endif
