#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace confeval {

// Dense row-major design matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Regularized empirical risk and its (sub)gradient:
//   value = (1/n) sum_i loss(y_i, w.x_i + b) + (lambda/2) |w|^2
// with labels y_i in {-1, +1}. The bias is not regularized.
struct Objective {
    double value = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
};

namespace kernels {

// Rows per reduction block. Parallel kernels sum fixed blocks and then add
// the block partials in block order, so results are identical for any
// thread count.
inline constexpr std::size_t kBlockRows = 256;

// log(1 + exp(-m)), stable for large |m|.
double log1p_exp_neg(double m);

// Logistic loss log(1 + exp(-y z)).
Objective logistic_serial(const Matrix& x, std::span<const double> y, std::span<const double> w,
                          double b, double lambda);
Objective logistic_parallel(const Matrix& x, std::span<const double> y, std::span<const double> w,
                            double b, double lambda);

// Hinge loss max(0, 1 - y z); the subgradient uses 0 at the kink.
Objective hinge_serial(const Matrix& x, std::span<const double> y, std::span<const double> w,
                       double b, double lambda);
Objective hinge_parallel(const Matrix& x, std::span<const double> y, std::span<const double> w,
                         double b, double lambda);

// z_i = w.x_i + b.
std::vector<double> scores_serial(const Matrix& x, std::span<const double> w, double b);
std::vector<double> scores_parallel(const Matrix& x, std::span<const double> w, double b);

// Per-column mean and population standard deviation.
void column_moments_serial(const Matrix& x, std::vector<double>& mean, std::vector<double>& sd);
void column_moments_parallel(const Matrix& x, std::vector<double>& mean, std::vector<double>& sd);

}  // namespace kernels
}  // namespace confeval
