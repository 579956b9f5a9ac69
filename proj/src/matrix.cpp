#include "varskip/matrix.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "varskip/error.hpp"

namespace varskip {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

CMap cmap(const DenseMatrix& m) { return CMap(m.data.data(), m.rows, m.cols); }
MMap mmap(DenseMatrix& m) { return MMap(m.data.data(), m.rows, m.cols); }

void check_shapes(int64_t a, int64_t b, const char* what) {
    if (a != b)
        fail_invalid(std::string("shape mismatch in ") + what + ": " + std::to_string(a) +
                     " vs " + std::to_string(b));
}

}  // namespace

void matmul(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
    check_shapes(a.cols, b.rows, "matmul");
    if (out.rows != a.rows || out.cols != b.cols) out = DenseMatrix(a.rows, b.cols);
    mmap(out).noalias() = cmap(a) * cmap(b);
}

void matmul_tn(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
    check_shapes(a.rows, b.rows, "matmul_tn");
    if (out.rows != a.cols || out.cols != b.cols) out = DenseMatrix(a.cols, b.cols);
    mmap(out).noalias() = cmap(a).transpose() * cmap(b);
}

void matmul_nt(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
    check_shapes(a.cols, b.cols, "matmul_nt");
    if (out.rows != a.rows || out.cols != b.rows) out = DenseMatrix(a.rows, b.rows);
    mmap(out).noalias() = cmap(a) * cmap(b).transpose();
}

void matmul_rows(const DenseMatrix& a, const DenseMatrix& b, int64_t rows_b, DenseMatrix& out) {
    check_shapes(a.cols, rows_b, "matmul_rows");
    if (rows_b > b.rows) fail_invalid("matmul_rows: slice larger than matrix");
    if (out.rows != a.rows || out.cols != b.cols) out = DenseMatrix(a.rows, b.cols);
    CMap bm(b.data.data(), rows_b, b.cols);
    mmap(out).noalias() = cmap(a) * bm;
}

void matmul_nt_rows(const DenseMatrix& a, const DenseMatrix& b, int64_t rows_b, DenseMatrix& out) {
    check_shapes(a.cols, b.cols, "matmul_nt_rows");
    if (rows_b > b.rows) fail_invalid("matmul_nt_rows: slice larger than matrix");
    if (out.rows != a.rows || out.cols != rows_b) out = DenseMatrix(a.rows, rows_b);
    CMap bm(b.data.data(), rows_b, b.cols);
    mmap(out).noalias() = cmap(a) * bm.transpose();
}

void matmul_tn_acc_rows(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out,
                        int64_t rows_out) {
    check_shapes(a.rows, b.rows, "matmul_tn_acc_rows");
    check_shapes(out.cols, b.cols, "matmul_tn_acc_rows(out)");
    if (a.cols != rows_out || rows_out > out.rows)
        fail_invalid("matmul_tn_acc_rows: bad output slice");
    MMap om(out.data.data(), rows_out, out.cols);
    om.noalias() += cmap(a).transpose() * cmap(b);
}

void softmax_rows(DenseMatrix& m) {
    for (int64_t r = 0; r < m.rows; ++r) {
        double* p = m.row(r);
        double mx = p[0];
        for (int64_t c = 1; c < m.cols; ++c) mx = std::max(mx, p[c]);
        double sum = 0.0;
        for (int64_t c = 0; c < m.cols; ++c) {
            p[c] = std::exp(p[c] - mx);
            sum += p[c];
        }
        double inv = 1.0 / sum;
        for (int64_t c = 0; c < m.cols; ++c) p[c] *= inv;
    }
}

void hadamard(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
    if (!a.same_shape(b)) fail_invalid("shape mismatch in hadamard");
    if (!out.same_shape(a)) out = DenseMatrix(a.rows, a.cols);
    for (size_t i = 0; i < a.size(); ++i) out.data[i] = a.data[i] * b.data[i];
}

void add_row_vector(DenseMatrix& m, std::span<const double> v) {
    check_shapes(m.cols, static_cast<int64_t>(v.size()), "add_row_vector");
    for (int64_t r = 0; r < m.rows; ++r) {
        double* p = m.row(r);
        for (int64_t c = 0; c < m.cols; ++c) p[c] += v[c];
    }
}

void relu_inplace(DenseMatrix& m) {
    for (double& x : m.data)
        if (x < 0.0) x = 0.0;
}

void relu_backward(const DenseMatrix& pre, DenseMatrix& grad) {
    if (!pre.same_shape(grad)) fail_invalid("shape mismatch in relu_backward");
    for (size_t i = 0; i < pre.size(); ++i)
        if (pre.data[i] <= 0.0) grad.data[i] = 0.0;
}

std::vector<double> col_sums(const DenseMatrix& m) {
    std::vector<double> out(static_cast<size_t>(m.cols), 0.0);
    for (int64_t r = 0; r < m.rows; ++r) {
        const double* p = m.row(r);
        for (int64_t c = 0; c < m.cols; ++c) out[static_cast<size_t>(c)] += p[c];
    }
    return out;
}

bool all_finite(const DenseMatrix& m) { return all_finite(std::span<const double>(m.data)); }

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace varskip
