#include "confeval/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace confeval::kernels {

namespace {

void check_shapes(const Matrix& x, std::span<const double> y, std::span<const double> w) {
    if (y.size() != x.rows) throw std::invalid_argument("kernel: label count != rows");
    if (w.size() != x.cols) throw std::invalid_argument("kernel: weight dimension != cols");
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double squared_norm(std::span<const double> w) { return dot(w, w); }

// Per-row loss and the factor g such that d loss / d z = g.
struct LogisticRow {
    static void eval(double y, double z, double& loss, double& g) {
        loss = log1p_exp_neg(y * z);
        g = -y * sigmoid(-y * z);
    }
};

struct HingeRow {
    static void eval(double y, double z, double& loss, double& g) {
        const double m = 1.0 - y * z;
        loss = m > 0.0 ? m : 0.0;
        g = m > 0.0 ? -y : 0.0;
    }
};

template <typename Row>
Objective serial_objective(const Matrix& x, std::span<const double> y, std::span<const double> w,
                           double b, double lambda) {
    check_shapes(x, y, w);
    Objective o;
    o.grad_w.assign(x.cols, 0.0);
    const double n = static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const auto xi = x.row(i);
        double loss = 0.0, g = 0.0;
        Row::eval(y[i], dot(xi, w) + b, loss, g);
        o.value += loss;
        o.grad_b += g;
        for (std::size_t j = 0; j < x.cols; ++j) o.grad_w[j] += g * xi[j];
    }
    o.value = o.value / n + 0.5 * lambda * squared_norm(w);
    o.grad_b /= n;
    for (std::size_t j = 0; j < x.cols; ++j) o.grad_w[j] = o.grad_w[j] / n + lambda * w[j];
    return o;
}

template <typename Row>
Objective parallel_objective(const Matrix& x, std::span<const double> y, std::span<const double> w,
                             double b, double lambda) {
    check_shapes(x, y, w);
    const std::size_t d = x.cols;
    const std::size_t blocks = (x.rows + kBlockRows - 1) / kBlockRows;
    // Per block: [loss, grad_b, grad_w...].
    const std::size_t stride = d + 2;
    std::vector<double> partial(blocks * stride, 0.0);

    const auto nblocks = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static)
    for (long long blk = 0; blk < nblocks; ++blk) {
        double* p = partial.data() + static_cast<std::size_t>(blk) * stride;
        const std::size_t lo = static_cast<std::size_t>(blk) * kBlockRows;
        const std::size_t hi = std::min(lo + kBlockRows, x.rows);
        for (std::size_t i = lo; i < hi; ++i) {
            const auto xi = x.row(i);
            double loss = 0.0, g = 0.0;
            Row::eval(y[i], dot(xi, w) + b, loss, g);
            p[0] += loss;
            p[1] += g;
            double* gw = p + 2;
#pragma omp simd
            for (std::size_t j = 0; j < d; ++j) gw[j] += g * xi[j];
        }
    }

    Objective o;
    o.grad_w.assign(d, 0.0);
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        const double* p = partial.data() + blk * stride;
        o.value += p[0];
        o.grad_b += p[1];
        for (std::size_t j = 0; j < d; ++j) o.grad_w[j] += p[2 + j];
    }
    const double n = static_cast<double>(x.rows);
    o.value = o.value / n + 0.5 * lambda * squared_norm(w);
    o.grad_b /= n;
    for (std::size_t j = 0; j < d; ++j) o.grad_w[j] = o.grad_w[j] / n + lambda * w[j];
    return o;
}

}  // namespace

double log1p_exp_neg(double m) {
    if (m > 0) return std::log1p(std::exp(-m));
    return -m + std::log1p(std::exp(m));
}

Objective logistic_serial(const Matrix& x, std::span<const double> y, std::span<const double> w,
                          double b, double lambda) {
    return serial_objective<LogisticRow>(x, y, w, b, lambda);
}

Objective logistic_parallel(const Matrix& x, std::span<const double> y, std::span<const double> w,
                            double b, double lambda) {
    return parallel_objective<LogisticRow>(x, y, w, b, lambda);
}

Objective hinge_serial(const Matrix& x, std::span<const double> y, std::span<const double> w,
                       double b, double lambda) {
    return serial_objective<HingeRow>(x, y, w, b, lambda);
}

Objective hinge_parallel(const Matrix& x, std::span<const double> y, std::span<const double> w,
                         double b, double lambda) {
    return parallel_objective<HingeRow>(x, y, w, b, lambda);
}

std::vector<double> scores_serial(const Matrix& x, std::span<const double> w, double b) {
    if (w.size() != x.cols) throw std::invalid_argument("scores: weight dimension != cols");
    std::vector<double> z(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) z[i] = dot(x.row(i), w) + b;
    return z;
}

std::vector<double> scores_parallel(const Matrix& x, std::span<const double> w, double b) {
    if (w.size() != x.cols) throw std::invalid_argument("scores: weight dimension != cols");
    std::vector<double> z(x.rows);
    const auto rows = static_cast<long long>(x.rows);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < rows; ++i) {
        const auto r = static_cast<std::size_t>(i);
        z[r] = dot(x.row(r), w) + b;
    }
    return z;
}

void column_moments_serial(const Matrix& x, std::vector<double>& mean, std::vector<double>& sd) {
    mean.assign(x.cols, 0.0);
    sd.assign(x.cols, 0.0);
    if (x.rows == 0) return;
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) mean[j] += x(i, j);
    for (auto& m : mean) m /= static_cast<double>(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i)
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double c = x(i, j) - mean[j];
            sd[j] += c * c;
        }
    for (auto& s : sd) s = std::sqrt(s / static_cast<double>(x.rows));
}

void column_moments_parallel(const Matrix& x, std::vector<double>& mean, std::vector<double>& sd) {
    mean.assign(x.cols, 0.0);
    sd.assign(x.cols, 0.0);
    if (x.rows == 0) return;
    // Columns are independent; each thread owns whole columns and sums rows
    // in order, matching the serial result bit for bit.
    const auto cols = static_cast<long long>(x.cols);
#pragma omp parallel for schedule(static)
    for (long long jj = 0; jj < cols; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        double m = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) m += x(i, j);
        m /= static_cast<double>(x.rows);
        double v = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double c = x(i, j) - m;
            v += c * c;
        }
        mean[j] = m;
        sd[j] = std::sqrt(v / static_cast<double>(x.rows));
    }
}

}  // namespace confeval::kernels
