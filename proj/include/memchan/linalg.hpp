// Dense complex linear algebra for the small matrices this library needs
// (2x2 and 4x4 states, 16x16 Choi matrices): products, adjoints, Kronecker
// and Hadamard products, a cyclic Jacobi eigensolver for Hermitian input,
// and the trace norm.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/container/small_vector.hpp>

namespace memchan {

using cdouble = std::complex<double>;

struct DimensionMismatch : std::invalid_argument {
    explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

struct NotHermitian : std::invalid_argument {
    explicit NotHermitian(const std::string& what) : std::invalid_argument(what) {}
};

struct NoConvergence : std::runtime_error {
    explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

// Row-major dense complex matrix. Entries for dimensions up to 4x4 live
// inline; only the 16x16 Choi matrices spill to the heap.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;

    ComplexMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, cdouble{0.0, 0.0}) {
        if (rows <= 0 || cols <= 0) throw DimensionMismatch("ComplexMatrix: dimensions must be positive");
    }

    ComplexMatrix(std::initializer_list<std::initializer_list<cdouble>> init)
        : ComplexMatrix(static_cast<int>(init.size()), static_cast<int>(init.begin()->size())) {
        int i = 0;
        for (const auto& row : init) {
            if (static_cast<int>(row.size()) != cols_)
                throw DimensionMismatch("ComplexMatrix: ragged initializer");
            int j = 0;
            for (const auto& v : row) (*this)(i, j++) = v;
            ++i;
        }
    }

    static ComplexMatrix identity(int n) {
        ComplexMatrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    cdouble& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * cols_ + j]; }
    const cdouble& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * cols_ + j]; }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    ComplexMatrix& operator*=(cdouble s) {
        for (auto& v : a_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(cdouble s, ComplexMatrix a) { return a *= s; }
    friend ComplexMatrix operator*(ComplexMatrix a, cdouble s) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        if (a.cols_ != b.rows_) throw DimensionMismatch("operator*: inner dimensions differ");
        ComplexMatrix c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const cdouble aik = a(i, k);
                if (aik == cdouble{0.0, 0.0}) continue;
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    ComplexMatrix adjoint() const {
        ComplexMatrix m(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    ComplexMatrix conjugate() const {
        ComplexMatrix m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = std::conj((*this)(i, j));
        return m;
    }

    cdouble trace() const {
        cdouble t{0.0, 0.0};
        for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool all_finite() const {
        for (const auto& v : a_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    // Largest entrywise deviation from the adjoint; 0 for exactly Hermitian input.
    double hermiticity_defect() const {
        if (rows_ != cols_) return std::numeric_limits<double>::infinity();
        double m = 0.0;
        for (int i = 0; i < rows_; ++i)
            for (int j = i; j < cols_; ++j)
                m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return m;
    }

  private:
    void require_same_shape(const ComplexMatrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw DimensionMismatch(std::string(op) + ": shapes differ");
    }

    int rows_ = 0;
    int cols_ = 0;
    boost::container::small_vector<cdouble, 16> a_;
};

// Pauli matrices sigma_0..sigma_3 (identity, x, y, z).
inline const ComplexMatrix& pauli(int i) {
    static const ComplexMatrix s0{{1.0, 0.0}, {0.0, 1.0}};
    static const ComplexMatrix s1{{0.0, 1.0}, {1.0, 0.0}};
    static const ComplexMatrix s2{{0.0, cdouble{0.0, -1.0}}, {cdouble{0.0, 1.0}, 0.0}};
    static const ComplexMatrix s3{{1.0, 0.0}, {0.0, -1.0}};
    switch (i) {
        case 0: return s0;
        case 1: return s1;
        case 2: return s2;
        case 3: return s3;
        default: throw std::out_of_range("pauli: index must be 0..3");
    }
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix c(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const cdouble aij = a(i, j);
            if (aij == cdouble{0.0, 0.0}) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    c(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return c;
}

inline ComplexMatrix hadamard_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionMismatch("hadamard_product: shapes differ");
    ComplexMatrix c(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) * b(i, j);
    return c;
}

// Trace over one tensor factor of a (dim_a*dim_b) x (dim_a*dim_b) matrix.
// keep_first=true returns the dim_a x dim_a reduction, tracing out the second factor.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, int dim_a, int dim_b, bool keep_first) {
    if (m.rows() != dim_a * dim_b || m.cols() != dim_a * dim_b)
        throw DimensionMismatch("partial_trace: matrix is not (dim_a*dim_b) square");
    if (keep_first) {
        ComplexMatrix out(dim_a, dim_a);
        for (int i = 0; i < dim_a; ++i)
            for (int j = 0; j < dim_a; ++j)
                for (int k = 0; k < dim_b; ++k) out(i, j) += m(i * dim_b + k, j * dim_b + k);
        return out;
    }
    ComplexMatrix out(dim_b, dim_b);
    for (int k = 0; k < dim_b; ++k)
        for (int l = 0; l < dim_b; ++l)
            for (int i = 0; i < dim_a; ++i) out(k, l) += m(i * dim_b + k, i * dim_b + l);
    return out;
}

struct HermitianEigenResult {
    std::vector<double> values;  // descending
    ComplexMatrix vectors;       // columns; a = V diag(values) V^dagger
};

constexpr double kHermiticityTol = 1e-10;

namespace detail {

// Cyclic Jacobi for Hermitian matrices. Unconditionally convergent at the
// sizes used here (n <= 16); tolerance 1e-13 on the off-diagonal mass,
// at most 100 sweeps.
inline HermitianEigenResult jacobi_eigen(ComplexMatrix a, bool want_vectors) {
    const int n = a.rows();
    ComplexMatrix v = want_vectors ? ComplexMatrix::identity(n) : ComplexMatrix();

    const double scale = std::max(1.0, a.frobenius_norm());
    const double tol = 1e-13 * scale;
    constexpr int kMaxSweeps = 100;

    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += 2.0 * std::norm(a(p, q));
        if (std::sqrt(off) <= tol) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cdouble beta = a(p, q);
                const double abs_beta = std::abs(beta);
                if (abs_beta == 0.0) continue;

                // Reduce the (p,q) block to the real symmetric case and pick
                // the smaller rotation angle, as in Golub & Van Loan 8.4.
                const cdouble phase = beta / abs_beta;
                const double alpha = a(p, p).real();
                const double gamma_ = a(q, q).real();
                const double tau = (gamma_ - alpha) / (2.0 * abs_beta);
                const double t = (tau >= 0.0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                              : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const cdouble s = phase * (t * c);
                const cdouble s_conj = std::conj(s);

                for (int k = 0; k < n; ++k) {  // columns: a <- a J
                    const cdouble ap = a(k, p), aq = a(k, q);
                    a(k, p) = c * ap - s_conj * aq;
                    a(k, q) = s * ap + c * aq;
                }
                for (int k = 0; k < n; ++k) {  // rows: a <- J^dagger a
                    const cdouble ap = a(p, k), aq = a(q, k);
                    a(p, k) = c * ap - s * aq;
                    a(q, k) = s_conj * ap + c * aq;
                }
                a(p, q) = a(q, p) = 0.0;
                a(p, p) = cdouble{a(p, p).real(), 0.0};
                a(q, q) = cdouble{a(q, q).real(), 0.0};

                if (want_vectors) {
                    for (int k = 0; k < n; ++k) {
                        const cdouble vp = v(k, p), vq = v(k, q);
                        v(k, p) = c * vp - s_conj * vq;
                        v(k, q) = s * vp + c * vq;
                    }
                }
            }
        }
    }
    if (sweep == kMaxSweeps) throw NoConvergence("jacobi_eigen: no convergence in 100 sweeps");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });

    HermitianEigenResult res;
    res.values.resize(n);
    for (int i = 0; i < n; ++i) res.values[i] = a(order[i], order[i]).real();
    if (want_vectors) {
        res.vectors = ComplexMatrix(n, n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) res.vectors(k, j) = v(k, order[j]);
    }
    return res;
}

inline void require_hermitian(const ComplexMatrix& a, const char* who) {
    if (a.rows() != a.cols()) throw DimensionMismatch(std::string(who) + ": matrix not square");
    const double defect = a.hermiticity_defect();
    if (!(defect <= kHermiticityTol))
        throw NotHermitian(std::string(who) + ": hermiticity defect " + std::to_string(defect));
}

}  // namespace detail

// Eigenvalues of a Hermitian matrix, descending. Input must be Hermitian
// within 1e-10 entrywise.
inline std::vector<double> hermitian_eigenvalues(const ComplexMatrix& a) {
    detail::require_hermitian(a, "hermitian_eigenvalues");
    return detail::jacobi_eigen(a, /*want_vectors=*/false).values;
}

inline HermitianEigenResult hermitian_eigen(const ComplexMatrix& a) {
    detail::require_hermitian(a, "hermitian_eigen");
    return detail::jacobi_eigen(a, /*want_vectors=*/true);
}

// Sum of absolute eigenvalues; equals Tr|a| for Hermitian a.
inline double trace_norm(const ComplexMatrix& a) {
    const auto ev = hermitian_eigenvalues(a);
    double s = 0.0;
    for (double x : ev) s += std::abs(x);
    return s;
}

}  // namespace memchan
