#pragma once

// Dense complex matrix kernel sized for antenna arrays (n <= ~64).
// Hermitian eigenproblems are solved with cyclic complex Jacobi rotations,
// which keep the residual at a few ulps of the Frobenius norm.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "marc/error.hpp"

namespace marc {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_) {
            throw Error(ErrorKind::ShapeMismatch, "entry count " + std::to_string(data_.size()) +
                                                      " does not match " + std::to_string(rows_) + "x" +
                                                      std::to_string(cols_));
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix diagonal(std::span<const double> d) {
        ComplexMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    static ComplexMatrix column(std::span<const cplx> v) {
        return ComplexMatrix(v.size(), 1, std::vector<cplx>(v.begin(), v.end()));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }
    std::span<const cplx> entries() const noexcept { return data_; }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    CVector col(std::size_t j) const {
        CVector v(rows_);
        for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
        return v;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
        return t;
    }

    bool all_finite() const noexcept {
        return std::all_of(data_.begin(), data_.end(),
                           [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    double frobenius_norm() const noexcept {
        double s = 0.0;
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    cplx trace() const {
        cplx t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    ComplexMatrix& operator*=(cplx s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
    friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw Error(ErrorKind::ShapeMismatch, "product of " + a.shape() + " and " + b.shape());
        }
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    void require_same_shape(const ComplexMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw Error(ErrorKind::ShapeMismatch, shape() + " vs " + o.shape());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

// ---- vector helpers -------------------------------------------------------

inline double norm(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

/// a^H b
inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.size() != b.size()) throw Error(ErrorKind::ShapeMismatch, "dot of vectors with different lengths");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline CVector matvec(const ComplexMatrix& a, std::span<const cplx> x) {
    if (a.cols() != x.size()) {
        throw Error(ErrorKind::ShapeMismatch, "matvec of " + a.shape() + " with length " + std::to_string(x.size()));
    }
    CVector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[i] += a(i, j) * x[j];
    return y;
}

/// u v^H
inline ComplexMatrix outer(std::span<const cplx> u, std::span<const cplx> v) {
    ComplexMatrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = u[i] * std::conj(v[j]);
    return m;
}

// ---- structural checks ----------------------------------------------------

inline void require_finite(const ComplexMatrix& a) {
    if (!a.all_finite()) throw Error(ErrorKind::NotFinite, "matrix " + a.shape() + " has non-finite entries");
}

/// max_ij |A_ij - conj(A_ji)|; infinity for non-square input.
inline double hermitian_defect(const ComplexMatrix& a) {
    if (!a.is_square()) return std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - std::conj(a(j, i))));
    return d;
}

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPsdFloor = 1e-9;

/// Symmetry check, scaled by the largest entry so that large Gram sums are not rejected for rounding.
inline bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol) {
    return a.is_square() && hermitian_defect(a) <= tol * std::max(1.0, a.max_abs());
}

/// (A + A^H) / 2, with an exactly real diagonal.
inline ComplexMatrix hermitian_part(const ComplexMatrix& a) {
    if (!a.is_square()) throw Error(ErrorKind::ShapeMismatch, "hermitian_part of " + a.shape());
    ComplexMatrix h(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        h(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            const cplx v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            h(i, j) = v;
            h(j, i) = std::conj(v);
        }
    }
    return h;
}

// ---- eigen machinery ------------------------------------------------------

struct HermitianEig {
    std::vector<double> eigenvalues;   // descending
    std::vector<CVector> eigenvectors;  // unit norm, phase-normalized
};

namespace detail {

/// Rotates v so that its first non-negligible component is real and positive.
inline void normalize_phase(CVector& v) {
    const double scale = norm(v);
    for (auto& z : v) {
        if (std::abs(z) > 1e-13 * scale) {
            const cplx phase = std::conj(z) / std::abs(z);
            for (auto& w : v) w *= phase;
            z = cplx(z.real(), 0.0);
            return;
        }
    }
}

inline void normalize_unit(CVector& v) {
    const double n = norm(v);
    if (n > 0.0)
        for (auto& z : v) z /= n;
}

/// Lexicographic "greater" on (re, im) of each component; used to order vectors of tied eigenvalues.
inline bool lexicographically_greater(const CVector& a, const CVector& b) {
    constexpr double eps = 1e-12;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].real() - b[i].real()) > eps) return a[i].real() > b[i].real();
        if (std::abs(a[i].imag() - b[i].imag()) > eps) return a[i].imag() > b[i].imag();
    }
    return false;
}

inline double off_diagonal_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace detail

inline HermitianEig eig_hermitian(const ComplexMatrix& input) {
    require_finite(input);
    if (!is_hermitian(input)) {
        throw Error(ErrorKind::NotHermitian, "matrix " + input.shape() + " has symmetry defect " +
                                                 std::to_string(hermitian_defect(input)));
    }
    const std::size_t n = input.rows();
    ComplexMatrix a = hermitian_part(input);
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double total = std::max(a.frobenius_norm(), std::numeric_limits<double>::min());
    constexpr int kMaxSweeps = 100;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (detail::off_diagonal_norm(a) <= 1e-15 * total) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double mag = std::abs(a(p, q));
                if (mag == 0.0) continue;
                // Unitary J = diag(1, e^{-i phi}) * [[c, s], [-s, c]] on the (p, q) plane makes
                // the 2x2 block real symmetric and then annihilates its off-diagonal.
                const cplx phase = std::conj(a(p, q)) / mag;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                const cplx jpp = c, jpq = s, jqp = -s * phase, jqq = c * phase;

                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * jpp + akq * jqp;
                    a(k, q) = akp * jpq + akq * jqq;
                    const cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp * jpp + vkq * jqp;
                    v(k, q) = vkp * jpq + vkq * jqq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = a(p, k), aqk = a(q, k);
                    a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
                    a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<std::pair<double, CVector>> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        CVector col = v.col(i);
        detail::normalize_unit(col);
        detail::normalize_phase(col);
        pairs.emplace_back(a(i, i).real(), std::move(col));
    }
    const double tie_tol = 1e-12 * std::max(1.0, input.max_abs());
    std::sort(pairs.begin(), pairs.end(), [tie_tol](const auto& x, const auto& y) {
        if (std::abs(x.first - y.first) > tie_tol) return x.first > y.first;
        return detail::lexicographically_greater(x.second, y.second);
    });

    HermitianEig out;
    out.eigenvalues.reserve(n);
    out.eigenvectors.reserve(n);
    for (auto& [lambda, vec] : pairs) {
        out.eigenvalues.push_back(lambda);
        out.eigenvectors.push_back(std::move(vec));
    }
    return out;
}

struct EigMax {
    double lambda = 0.0;
    CVector vector;
};

/// Largest eigenvalue and its phase-normalized unit eigenvector of a Hermitian PSD matrix.
inline EigMax eig_max(const ComplexMatrix& a) {
    HermitianEig e = eig_hermitian(a);
    if (e.eigenvalues.empty()) throw Error(ErrorKind::InvalidDimensions, "eig_max of an empty matrix");
    const double floor = -kPsdFloor * std::max(1.0, e.eigenvalues.front());
    if (e.eigenvalues.back() < floor) {
        throw Error(ErrorKind::InvalidArgument,
                    "eig_max expects a PSD matrix; min eigenvalue " + std::to_string(e.eigenvalues.back()));
    }
    return {std::max(0.0, e.eigenvalues.front()), std::move(e.eigenvectors.front())};
}

/// A A^H, exactly Hermitian.
inline ComplexMatrix gram(const ComplexMatrix& a) {
    require_finite(a);
    const std::size_t n = a.rows();
    ComplexMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) d += std::norm(a(i, k));
        g(i, i) = d;
        for (std::size_t j = i + 1; j < n; ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * std::conj(a(j, k));
            g(i, j) = s;
            g(j, i) = std::conj(s);
        }
    }
    return g;
}

/// A B A^H for Hermitian B, returned exactly Hermitian.
inline ComplexMatrix sandwich(const ComplexMatrix& a, const ComplexMatrix& b) {
    return hermitian_part(a * b * a.adjoint());
}

inline double rayleigh(const ComplexMatrix& a, std::span<const cplx> x) {
    const double xx = norm(x);
    if (!(xx > 0.0)) throw Error(ErrorKind::ZeroVector, "rayleigh quotient of a zero vector");
    const cplx num = dot(x, matvec(a, x));
    const double den = xx * xx;
    if (std::abs(num.imag()) > 1e-10 * std::max(1.0, std::abs(num))) {
        throw Error(ErrorKind::NotHermitian, "rayleigh quotient has imaginary residual " + std::to_string(num.imag()));
    }
    return num.real() / den;
}

struct PsdCheck {
    bool ok = false;
    double min_eigenvalue = 0.0;
    std::string diagnostic;
};

inline PsdCheck check_psd(const ComplexMatrix& a, double tol) {
    if (!a.is_square()) return {false, 0.0, "not square: " + a.shape()};
    if (!a.all_finite()) return {false, 0.0, "non-finite entries"};
    if (!is_hermitian(a, tol)) return {false, 0.0, "not Hermitian, defect " + std::to_string(hermitian_defect(a))};
    const auto e = eig_hermitian(a);
    const double lmin = e.eigenvalues.empty() ? 0.0 : e.eigenvalues.back();
    if (lmin < -tol) return {false, lmin, "min eigenvalue " + std::to_string(lmin)};
    return {true, lmin, {}};
}

inline bool is_psd(const ComplexMatrix& a, double tol) { return check_psd(a, tol).ok; }

/// Singular values of A in descending order.
inline std::vector<double> singular_values(const ComplexMatrix& a) {
    const bool wide = a.cols() > a.rows();
    const auto e = eig_hermitian(wide ? gram(a) : gram(a.adjoint()));
    std::vector<double> s;
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) s.push_back(std::sqrt(std::max(0.0, e.eigenvalues[i])));
    return s;
}

struct SingularTriplet {
    double sigma = 0.0;
    CVector left;   // unit, length rows
    CVector right;  // unit, length cols
};

/// Dominant singular triplet: A v = sigma u with v the top eigenvector of A^H A.
inline SingularTriplet top_singular(const ComplexMatrix& a) {
    auto [lambda, right] = eig_max(gram(a.adjoint()));
    const double sigma = std::sqrt(lambda);
    CVector left(a.rows());
    if (sigma > 0.0) {
        left = matvec(a, right);
        for (auto& z : left) z /= sigma;
    } else if (!left.empty()) {
        left[0] = 1.0;
    }
    return {sigma, std::move(left), std::move(right)};
}

}  // namespace marc
