#include <cmath>

#include "doctest.h"
#include "varskip/adam.hpp"
#include "varskip/error.hpp"
#include "varskip/gradcheck.hpp"
#include "varskip/matrix.hpp"
#include "varskip/rng.hpp"

using namespace varskip;

namespace {

DenseMatrix mat(int64_t rows, int64_t cols, std::vector<double> vals) {
    DenseMatrix m(rows, cols);
    REQUIRE(vals.size() == m.data.size());
    m.data = std::move(vals);
    return m;
}

// Schoolbook reference multiply, independent of the Eigen-backed kernels.
DenseMatrix ref_matmul(const DenseMatrix& a, const DenseMatrix& b, bool ta, bool tb) {
    const int64_t m = ta ? a.cols : a.rows;
    const int64_t k = ta ? a.rows : a.cols;
    const int64_t n = tb ? b.rows : b.cols;
    DenseMatrix out(m, n);
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (int64_t p = 0; p < k; ++p) {
                double av = ta ? a.at(p, i) : a.at(i, p);
                double bv = tb ? b.at(j, p) : b.at(p, j);
                s += av * bv;
            }
            out.at(i, j) = s;
        }
    return out;
}

void check_close(const DenseMatrix& got, const DenseMatrix& want, double tol = 1e-12) {
    REQUIRE(got.rows == want.rows);
    REQUIRE(got.cols == want.cols);
    for (size_t i = 0; i < got.data.size(); ++i)
        CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(tol));
}

DenseMatrix random_mat(int64_t rows, int64_t cols, Rng& rng) {
    DenseMatrix m(rows, cols);
    for (double& x : m.data) x = rng.uniform_real(-1.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("matmul kernels match a schoolbook reference") {
    Rng rng(1);
    DenseMatrix a = random_mat(5, 7, rng);
    DenseMatrix b = random_mat(7, 3, rng);
    DenseMatrix out(5, 3);
    matmul(a, b, out);
    check_close(out, ref_matmul(a, b, false, false));

    DenseMatrix c = random_mat(5, 3, rng);
    DenseMatrix tn(7, 3);
    matmul_tn(a, c, tn);
    check_close(tn, ref_matmul(a, c, true, false));

    DenseMatrix d = random_mat(4, 7, rng);
    DenseMatrix nt(5, 4);
    matmul_nt(a, d, nt);
    check_close(nt, ref_matmul(a, d, false, true));
}

TEST_CASE("row-limited kernels slice the second operand") {
    Rng rng(2);
    DenseMatrix a = random_mat(4, 6, rng);
    DenseMatrix b = random_mat(9, 5, rng);  // only the first 6 rows used
    DenseMatrix out(4, 5);
    matmul_rows(a, b, 6, out);
    DenseMatrix b6 = mat(6, 5, std::vector<double>(b.data.begin(), b.data.begin() + 30));
    check_close(out, ref_matmul(a, b6, false, false));

    DenseMatrix c = random_mat(8, 6, rng);  // first 3 rows as a 3×6 operand
    DenseMatrix nt(4, 3);
    matmul_nt_rows(a, c, 3, nt);
    DenseMatrix c3 = mat(3, 6, std::vector<double>(c.data.begin(), c.data.begin() + 18));
    check_close(nt, ref_matmul(a, c3, false, true));

    DenseMatrix x = random_mat(5, 2, rng);
    DenseMatrix y = random_mat(5, 3, rng);
    DenseMatrix acc(4, 3);
    acc.fill(1.0);
    matmul_tn_acc_rows(x, y, acc, 2);  // acc[0:2] += xᵀ·y
    DenseMatrix want = ref_matmul(x, y, true, false);
    for (int64_t j = 0; j < 3; ++j) {
        CHECK(acc.at(0, j) == doctest::Approx(1.0 + want.at(0, j)));
        CHECK(acc.at(1, j) == doctest::Approx(1.0 + want.at(1, j)));
        CHECK(acc.at(2, j) == 1.0);
        CHECK(acc.at(3, j) == 1.0);
    }
}

TEST_CASE("softmax rows are stable and normalized") {
    DenseMatrix m = mat(2, 3, {1000.0, 1001.0, 1002.0, -3.0, 0.0, -3.0});
    softmax_rows(m);
    for (int64_t r = 0; r < 2; ++r) {
        double s = 0.0;
        for (int64_t c = 0; c < 3; ++c) {
            CHECK(m.at(r, c) > 0.0);
            s += m.at(r, c);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-15));
    }
    // Shift invariance: row 0 equals softmax(0,1,2).
    const double e0 = std::exp(0.0), e1 = std::exp(1.0), e2 = std::exp(2.0);
    CHECK(m.at(0, 0) == doctest::Approx(e0 / (e0 + e1 + e2)));
    CHECK(m.at(0, 2) == doctest::Approx(e2 / (e0 + e1 + e2)));
}

TEST_CASE("relu backward gates on the preactivation sign") {
    DenseMatrix pre = mat(1, 4, {-1.0, 0.0, 0.5, 2.0});
    DenseMatrix grad = mat(1, 4, {3.0, 5.0, 7.0, 9.0});
    relu_backward(pre, grad);
    CHECK(grad.data == std::vector<double>{0.0, 0.0, 7.0, 9.0});
}

TEST_CASE("adam first step moves by lr times gradient sign scale") {
    // After one step from zero state: delta == -lr * g / (|g| + eps).
    DenseMatrix p = mat(1, 3, {1.0, -2.0, 0.5});
    DenseMatrix g = mat(1, 3, {0.3, -0.07, 4.0});
    std::vector<DenseMatrix*> params = {&p};
    AdamState st = AdamState::init(params);
    adam_step(params, std::span<const DenseMatrix>(&g, 1), st, 0.01);
    for (int64_t j = 0; j < 3; ++j) {
        double gd = g.at(0, j);
        double want = (j == 0 ? 1.0 : j == 1 ? -2.0 : 0.5) -
                      0.01 * gd / (std::abs(gd) + st.eps);
        CHECK(p.at(0, j) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(st.step == 1);
}

TEST_CASE("adam converges on a quadratic and tracks constant gradients") {
    // Constant gradient: each step is ≈ -lr regardless of magnitude.
    DenseMatrix p = mat(1, 1, {0.0});
    DenseMatrix g = mat(1, 1, {1e-3});
    std::vector<DenseMatrix*> params = {&p};
    AdamState st = AdamState::init(params);
    for (int i = 0; i < 100; ++i) adam_step(params, std::span<const DenseMatrix>(&g, 1), st, 0.1);
    CHECK(p.at(0, 0) == doctest::Approx(-100 * 0.1).epsilon(0.02));

    // Minimize (x-3)^2 + (y+1)^2.
    DenseMatrix q = mat(1, 2, {10.0, -7.0});
    std::vector<DenseMatrix*> qp = {&q};
    AdamState st2 = AdamState::init(qp);
    for (int i = 0; i < 3000; ++i) {
        DenseMatrix grad = mat(1, 2, {2.0 * (q.at(0, 0) - 3.0), 2.0 * (q.at(0, 1) + 1.0)});
        adam_step(qp, std::span<const DenseMatrix>(&grad, 1), st2, 0.05);
    }
    CHECK(q.at(0, 0) == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(q.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("adam rejects non-finite gradients and shape drift") {
    DenseMatrix p = mat(1, 2, {0.0, 0.0});
    std::vector<DenseMatrix*> params = {&p};
    AdamState st = AdamState::init(params);
    DenseMatrix bad = mat(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()});
    CHECK_THROWS_AS(adam_step(params, std::span<const DenseMatrix>(&bad, 1), st, 0.1), Error);
    DenseMatrix wrong = mat(2, 1, {1.0, 1.0});
    CHECK_THROWS_AS(adam_step(params, std::span<const DenseMatrix>(&wrong, 1), st, 0.1), Error);
}

TEST_CASE("grad_check validates exact gradients and flags wrong ones") {
    // loss = sum_i w_i * p_i^2 with known gradient 2 w p.
    Rng rng(7);
    DenseMatrix p = random_mat(4, 5, rng);
    DenseMatrix w = random_mat(4, 5, rng);
    std::vector<DenseMatrix*> params = {&p};
    auto loss = [&]() {
        double s = 0.0;
        for (size_t i = 0; i < p.data.size(); ++i) s += w.data[i] * p.data[i] * p.data[i];
        return s;
    };
    DenseMatrix g(4, 5);
    for (size_t i = 0; i < p.data.size(); ++i) g.data[i] = 2.0 * w.data[i] * p.data[i];
    Rng crng(1);
    GradCheckReport rep = grad_check(params, std::span<const DenseMatrix>(&g, 1), loss, 20,
                                     1e-5, crng);
    CHECK(rep.max_rel_err < 1e-6);
    CHECK(rep.n_checked >= 20);

    g.data[3] += 0.5;  // corrupt one coordinate; oversampling must catch it
    Rng crng2(1);
    GradCheckReport bad = grad_check(params, std::span<const DenseMatrix>(&g, 1), loss,
                                     20 * p.data.size(), 1e-5, crng2);
    CHECK(bad.max_rel_err > 1e-2);
}

TEST_CASE("rng streams are deterministic and derive independent children") {
    Rng a(123), b(123);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(Rng::derive_seed(1, 2) == Rng::derive_seed(1, 2));
    CHECK(Rng::derive_seed(1, 2) != Rng::derive_seed(1, 3));
    CHECK(Rng::derive_seed(1, 2) != Rng::derive_seed(2, 2));

    Rng c(9);
    for (int i = 0; i < 1000; ++i) {
        uint64_t v = c.uniform_u64(10);
        CHECK(v < 10);
        double x = c.uniform_real();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        int k = c.uniform_int(5);
        CHECK(k >= 0);
        CHECK(k < 5);
    }
}
