#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

namespace varskip {

// Row-major dense matrix of 64-bit floats. The workhorse container for
// activations, weights and gradients.
struct DenseMatrix {
    int64_t rows = 0;
    int64_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(int64_t r, int64_t c) : rows(r), cols(c), data(static_cast<size_t>(r * c), 0.0) {}

    double& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols + c)]; }
    double at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols + c)]; }
    double* row(int64_t r) { return data.data() + r * cols; }
    const double* row(int64_t r) const { return data.data() + r * cols; }
    std::span<double> row_span(int64_t r) { return {row(r), static_cast<size_t>(cols)}; }
    std::span<const double> row_span(int64_t r) const { return {row(r), static_cast<size_t>(cols)}; }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

// out = a * b. Shapes checked.
void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
// out = a^T * b.
void matmul_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);
// out = a * b^T.
void matmul_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// Row-sliced variants used by the tied output layer (b restricted to its
// first rows_b rows) and accumulating products for gradient assembly.
// out = a * b[0:rows_b, :]
void matmul_rows(const DenseMatrix& a, const DenseMatrix& b, int64_t rows_b, DenseMatrix& out);
// out = a * b[0:rows_b, :]^T
void matmul_nt_rows(const DenseMatrix& a, const DenseMatrix& b, int64_t rows_b, DenseMatrix& out);
// out[0:rows_out, :] += a^T * b
void matmul_tn_acc_rows(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out,
                        int64_t rows_out);

// Numerically stable row-wise softmax, in place.
void softmax_rows(DenseMatrix& m);

// out = a ⊙ b (elementwise). Shapes checked.
void hadamard(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// m[r, :] += v for every row.
void add_row_vector(DenseMatrix& m, std::span<const double> v);

// Elementwise max(x, 0).
void relu_inplace(DenseMatrix& m);
// grad[i] = pre[i] > 0 ? grad[i] : 0 — backward of relu given pre-activation.
void relu_backward(const DenseMatrix& pre, DenseMatrix& grad);

// Column sums of m (length m.cols).
std::vector<double> col_sums(const DenseMatrix& m);

bool all_finite(const DenseMatrix& m);
bool all_finite(std::span<const double> v);

}  // namespace varskip
