// Construction, validation and seeded sampling of one- and two-qubit states:
// Bell states, the |++>/<--| product family, Haar-random pure and
// local-unitary-orbit states, and Ginibre mixed states.
#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "memchan/linalg.hpp"

namespace memchan {

struct IndexOutOfRange : std::out_of_range {
    explicit IndexOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

// Deterministic random stream addressed by (master_seed, stream_index).
// Identical addresses reproduce identical draw sequences regardless of how
// streams are scheduled across threads. Uniform and Gaussian variates are
// derived from raw mt19937_64 output so sequences do not depend on the
// standard library's distribution implementations.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : master_seed_(master_seed), stream_index_(stream_index),
          eng_(mix(master_seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1))) {}

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the second variate is cached.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Standard complex normal, E|z|^2 = 1.
    cdouble complex_gaussian() {
        const double x = gaussian();
        const double y = gaussian();
        return cdouble{x, y} * 0.7071067811865476;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {  // splitmix64 finalizer
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t master_seed_;
    std::uint64_t stream_index_;
    std::mt19937_64 eng_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

// State of one qubit (dim 2) or two qubits (dim 4). Invariants: Hermitian
// within 1e-10, unit trace within 1e-12, positive semidefinite within 1e-10.
// Constructors of the named families guarantee these; validate() checks them.
class DensityMatrix {
  public:
    explicit DensityMatrix(ComplexMatrix m) : mat_(std::move(m)) {
        if (mat_.rows() != mat_.cols() || (mat_.rows() != 2 && mat_.rows() != 4))
            throw DimensionMismatch("DensityMatrix: dimension must be 2 or 4");
    }

    int dim() const { return mat_.rows(); }
    const ComplexMatrix& matrix() const { return mat_; }
    const cdouble& operator()(int i, int j) const { return mat_(i, j); }

  private:
    ComplexMatrix mat_;
};

struct ValidationReport {
    bool ok = true;
    std::string violation;   // empty when ok
    double magnitude = 0.0;  // size of the worst violation
};

constexpr double kTraceTol = 1e-12;
constexpr double kPsdTol = 1e-10;

// Checks all DensityMatrix invariants; reports the violated one and its
// magnitude instead of throwing.
inline ValidationReport validate(const DensityMatrix& rho) {
    const ComplexMatrix& m = rho.matrix();
    if (!m.all_finite()) return {false, "finite", std::numeric_limits<double>::infinity()};
    const double herm = m.hermiticity_defect();
    if (herm > kHermiticityTol) return {false, "hermitian", herm};
    const double trace_dev = std::abs(m.trace() - cdouble{1.0, 0.0});
    if (trace_dev > kTraceTol) return {false, "trace", trace_dev};
    const auto ev = hermitian_eigenvalues(m);
    const double min_ev = ev.back();
    if (min_ev < -kPsdTol) return {false, "psd", -min_ev};
    return {};
}

// Bell index convention: 0 -> Phi+, 1 -> Phi-, 2 -> Psi+, 3 -> Psi-.
inline DensityMatrix bell_state(int k) {
    if (k < 0 || k > 3) throw IndexOutOfRange("bell_state: index must be 0..3");
    ComplexMatrix m(4, 4);
    const bool psi = k >= 2;            // Psi states live on |01>,|10>
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    const int i0 = psi ? 1 : 0;
    const int i1 = psi ? 2 : 3;
    m(i0, i0) = 0.5;
    m(i1, i1) = 0.5;
    m(i0, i1) = 0.5 * sign;
    m(i1, i0) = 0.5 * sign;
    return DensityMatrix(m);
}

enum class Sign { plus, minus };

// Projector onto |s1 s2> with |+-> the sigma_x eigenstates; all entries are
// +-1/4, the sign given by the parity of selected bits of row and column.
inline DensityMatrix plus_minus_state(Sign s1, Sign s2) {
    ComplexMatrix m(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            int parity = 0;
            if (s1 == Sign::minus) parity += ((i >> 1) & 1) + ((j >> 1) & 1);
            if (s2 == Sign::minus) parity += (i & 1) + (j & 1);
            m(i, j) = (parity % 2 == 0) ? 0.25 : -0.25;
        }
    return DensityMatrix(m);
}

// Haar-distributed unitary: QR of a complex Ginibre matrix via Gram-Schmidt
// with one reorthogonalization pass. The R diagonal comes out real positive,
// which makes the factorization unique and the Q factor Haar.
inline ComplexMatrix haar_unitary(int dim, RngStream& rng) {
    ComplexMatrix g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_gaussian();

    ComplexMatrix q(dim, dim);
    for (int k = 0; k < dim; ++k) {
        boost::container::small_vector<cdouble, 4> v(dim);
        for (int i = 0; i < dim; ++i) v[i] = g(i, k);
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < k; ++j) {
                cdouble proj{0.0, 0.0};
                for (int i = 0; i < dim; ++i) proj += std::conj(q(i, j)) * v[i];
                for (int i = 0; i < dim; ++i) v[i] -= proj * q(i, j);
            }
        }
        double norm = 0.0;
        for (int i = 0; i < dim; ++i) norm += std::norm(v[i]);
        norm = std::sqrt(norm);
        for (int i = 0; i < dim; ++i) q(i, k) = v[i] / norm;
    }
    return q;
}

enum class StateKind { pure, mixed_ginibre, product, max_entangled_lu, bell };

namespace detail {

inline ComplexMatrix random_pure_ket(int dim, RngStream& rng) {
    ComplexMatrix v(dim, 1);
    double norm = 0.0;
    for (int i = 0; i < dim; ++i) {
        v(i, 0) = rng.complex_gaussian();
        norm += std::norm(v(i, 0));
    }
    norm = std::sqrt(norm);
    for (int i = 0; i < dim; ++i) v(i, 0) /= norm;
    return v;
}

inline ComplexMatrix projector(const ComplexMatrix& ket) { return ket * ket.adjoint(); }

}  // namespace detail

// Seeded two-qubit state samplers:
//   pure             Haar-random pure state
//   mixed_ginibre    G G^dagger / Tr(G G^dagger), G complex Ginibre
//   product          tensor product of independent Haar-random qubit pure states
//   max_entangled_lu (U1 x U2) |Phi+><Phi+| (U1 x U2)^dagger, U1, U2 Haar
//   bell             uniformly drawn Bell projector
inline DensityMatrix sample_state(StateKind kind, RngStream& rng) {
    switch (kind) {
        case StateKind::pure:
            return DensityMatrix(detail::projector(detail::random_pure_ket(4, rng)));
        case StateKind::mixed_ginibre: {
            ComplexMatrix g(4, 4);
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) g(i, j) = rng.complex_gaussian();
            ComplexMatrix m = g * g.adjoint();
            m *= cdouble{1.0, 0.0} / m.trace();
            return DensityMatrix(m);
        }
        case StateKind::product: {
            const ComplexMatrix ket = kron(detail::random_pure_ket(2, rng), detail::random_pure_ket(2, rng));
            return DensityMatrix(detail::projector(ket));
        }
        case StateKind::max_entangled_lu: {
            const ComplexMatrix u = kron(haar_unitary(2, rng), haar_unitary(2, rng));
            return DensityMatrix(u * bell_state(0).matrix() * u.adjoint());
        }
        case StateKind::bell:
            return bell_state(static_cast<int>(rng.next_u64() % 4));
    }
    throw std::invalid_argument("sample_state: unknown kind");
}

}  // namespace memchan
