#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ptcam
{
/// Tridiagonal matrix stored by diagonals. lower[i] sits at (i+1, i) and
/// upper[i] at (i, i+1).
template <typename T>
struct Tridiagonal
{
    std::vector<T> lower;
    std::vector<T> diag;
    std::vector<T> upper;

    explicit Tridiagonal(std::size_t n = 0)
        : lower(n > 0 ? n - 1 : 0), diag(n), upper(n > 0 ? n - 1 : 0)
    {
    }

    std::size_t size() const { return diag.size(); }

    std::vector<T> multiply(std::span<const T> x) const
    {
        const std::size_t n = size();
        std::vector<T> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            T acc = diag[i] * x[i];
            if (i > 0) acc += lower[i - 1] * x[i - 1];
            if (i + 1 < n) acc += upper[i] * x[i + 1];
            y[i] = acc;
        }
        return y;
    }
};

/// Gaussian elimination with partial pivoting on a tridiagonal system
/// (same scheme as LAPACK gtsv: pivoting adds one super-super-diagonal).
/// Throws std::domain_error on an exactly singular pivot.
template <typename T>
std::vector<T> solve_tridiagonal(const Tridiagonal<T>& m, std::span<const T> rhs)
{
    using std::abs;
    const std::size_t n = m.size();
    if (rhs.size() != n) throw std::invalid_argument("solve_tridiagonal: size mismatch");
    if (n == 0) return {};

    std::vector<T> dl = m.lower;
    std::vector<T> d = m.diag;
    std::vector<T> du = m.upper;
    std::vector<T> du2(n > 2 ? n - 2 : 0, T{});
    std::vector<T> b(rhs.begin(), rhs.end());

    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (abs(d[i]) >= abs(dl[i])) {
            if (d[i] == T{}) throw std::domain_error("solve_tridiagonal: singular matrix");
            const T f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            dl[i] = T{};
        } else {
            // swap rows i and i+1
            const T f = d[i] / dl[i];
            d[i] = dl[i];
            const T tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            du[i] = tmp;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= f * b[i];
        }
    }
    if (d[n - 1] == T{}) throw std::domain_error("solve_tridiagonal: singular matrix");

    std::vector<T> x(n);
    x[n - 1] = b[n - 1] / d[n - 1];
    if (n > 1) x[n - 2] = (b[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for (std::size_t k = n - 2; k-- > 0;) {
        x[k] = (b[k] - du[k] * x[k + 1] - du2[k] * x[k + 2]) / d[k];
    }
    return x;
}

template <typename T>
double residual_norm(const Tridiagonal<T>& m, std::span<const T> x, std::span<const T> rhs)
{
    const auto y = m.multiply(x);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = std::abs(y[i] - rhs[i]);
        acc += r * r;
    }
    return std::sqrt(acc);
}

template <typename T>
double l2_norm(std::span<const T> v)
{
    double acc = 0.0;
    for (const auto& x : v) acc += std::abs(x) * std::abs(x);
    return std::sqrt(acc);
}
} // namespace ptcam
