// The noise model: random-telegraph dephasing law Phi(nu), time-dependent
// Pauli probabilities, the correlation kernel p_ij, Kraus-sum application of
// the one- and two-qubit channels, the closed-form Hadamard evolution, and a
// Choi-based CPTP certifier.
#pragma once

#include <array>
#include <cmath>

#include "memchan/states.hpp"

namespace memchan {

struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// Random-telegraph-noise dephasing parameter tau (dimensionless, coupling
// fixed to 1). tau > 1/4 gives oscillatory, non-Markovian decay of the
// coherence factor; tau < 1/4 gives monotone decay.
struct DephasingParams {
    double tau;

    explicit DephasingParams(double tau_) : tau(tau_) {
        if (!(tau > 0.0)) throw DomainError("DephasingParams: tau must be > 0");
    }
};

// Coherence factor Phi(nu) for scaled time nu = t / 2 tau:
//   tau > 1/4:  e^{-nu} [cos(u nu) + sin(u nu)/u],   u = sqrt((4 tau)^2 - 1)
//   tau < 1/4:  e^{-nu} [cosh(w nu) + sinh(w nu)/w], w = sqrt(1 - (4 tau)^2)
//   tau = 1/4:  e^{-nu} (1 + nu)
// The hyperbolic branch is the analytic continuation of the trigonometric
// one; Phi is entire in tau. Always in [-1, 1] for nu >= 0.
inline double phi(double nu, const DephasingParams& params) {
    if (!(nu >= 0.0)) throw DomainError("phi: nu must be >= 0");
    const double x = 4.0 * params.tau;
    if (x > 1.0) {
        const double u = std::sqrt(x * x - 1.0);
        return std::exp(-nu) * (std::cos(u * nu) + std::sin(u * nu) / u);
    }
    if (x < 1.0) {
        const double w = std::sqrt(1.0 - x * x);
        // cosh + sinh/w written via exponentials to avoid overflow at large nu
        const double ap = 0.5 * (1.0 + 1.0 / w);
        const double am = 0.5 * (1.0 - 1.0 / w);
        return ap * std::exp((w - 1.0) * nu) + am * std::exp(-(w + 1.0) * nu);
    }
    return std::exp(-nu) * (1.0 + nu);
}

// Probability 4-vector (q0, q1, q2, q3) of a single-qubit Pauli channel.
struct PauliProbabilities {
    std::array<double, 4> q;

    double operator[](int i) const { return q[static_cast<std::size_t>(i)]; }
};

constexpr double kProbTol = 1e-12;

// RTN dephasing probabilities q0 = (1 + Phi)/2, q1 = q2 = 0, q3 = (1 - Phi)/2.
inline PauliProbabilities pauli_probs(double nu, const DephasingParams& params) {
    const double f = phi(nu, params);
    return PauliProbabilities{{0.5 * (1.0 + f), 0.0, 0.0, 0.5 * (1.0 - f)}};
}

// Joint distribution p_ij over Pauli pairs for two channel uses with
// classical correlation strength mu: p_ij = (1-mu) q_i q_j + mu q_i delta_ij.
struct CorrelatedMapSpec {
    double mu;
    std::array<std::array<double, 4>, 4> p;

    double operator()(int i, int j) const {
        return p[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
};

inline CorrelatedMapSpec joint_probs(const PauliProbabilities& q, double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("joint_probs: mu must be in [0,1]");
    CorrelatedMapSpec spec{mu, {}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            spec.p[i][j] = (1.0 - mu) * q[i] * q[j] + (i == j ? mu * q[i] : 0.0);
    return spec;
}

// Anti-diagonal coherence multiplier Gamma(nu, mu) = (1 - mu) Phi(nu)^2 + mu,
// the only mu-dependent entry of the closed-form evolution matrix. Equals
// p00 - p03 - p30 + p33 of the dephasing kernel.
inline double gamma_factor(double nu, const DephasingParams& params, double mu) {
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("gamma_factor: mu must be in [0,1]");
    const double f = phi(nu, params);
    return (1.0 - mu) * f * f + mu;
}

// Single-qubit Pauli channel rho -> sum_i q_i sigma_i rho sigma_i.
inline DensityMatrix apply_single_qubit(const DensityMatrix& rho, const PauliProbabilities& q) {
    if (rho.dim() != 2) throw DimensionMismatch("apply_single_qubit: state must be dim 2");
    ComplexMatrix out(2, 2);
    for (int i = 0; i < 4; ++i) {
        if (q[i] == 0.0) continue;
        out += q[i] * (pauli(i) * rho.matrix() * pauli(i));
    }
    return DensityMatrix(out);
}

namespace detail {

inline const ComplexMatrix& pauli_pair(int i, int j) {
    static const std::array<ComplexMatrix, 16> table = [] {
        std::array<ComplexMatrix, 16> t;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) t[a * 4 + b] = kron(pauli(a), pauli(b));
        return t;
    }();
    return table[static_cast<std::size_t>(i * 4 + j)];
}

// Kraus sum over all 16 Pauli pairs; accepts any 4x4 operand so the Choi
// construction can feed basis matrices through it.
inline ComplexMatrix apply_pauli_pair_channel(const ComplexMatrix& x, const CorrelatedMapSpec& spec) {
    ComplexMatrix out(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double pij = spec(i, j);
            if (pij == 0.0) continue;
            const ComplexMatrix& u = pauli_pair(i, j);
            out += pij * (u * x * u);
        }
    return out;
}

// Entry multiplier of the closed-form evolution: 1 on the diagonal, Gamma on
// the anti-diagonal, Phi elsewhere (basis order |00>, |01>, |10>, |11>).
inline ComplexMatrix closed_form_multiplier(double phi_value, double gamma_value) {
    ComplexMatrix m(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            m(i, j) = (i == j) ? 1.0 : (i + j == 3 ? gamma_value : phi_value);
    return m;
}

inline ComplexMatrix evolve_entries(const ComplexMatrix& rho0, double phi_value, double gamma_value) {
    ComplexMatrix out(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double m = (i == j) ? 1.0 : (i + j == 3 ? gamma_value : phi_value);
            out(i, j) = rho0(i, j) * m;
        }
    return out;
}

}  // namespace detail

// Correlated two-use channel rho -> sum_ij p_ij (sigma_i x sigma_j) rho (sigma_i x sigma_j).
// Reduces to independent single-qubit uses when p factorizes (mu = 0).
inline DensityMatrix apply_two_qubit(const DensityMatrix& rho, const CorrelatedMapSpec& spec) {
    if (rho.dim() != 4) throw DimensionMismatch("apply_two_qubit: state must be dim 4");
    return DensityMatrix(detail::apply_pauli_pair_channel(rho.matrix(), spec));
}

// Closed-form dephasing evolution: Hadamard product of rho0 with the matrix
// that has 1 on the diagonal, Phi(nu) on single-excitation coherences and
// Gamma(nu, mu) on the anti-diagonal. Agrees with the Kraus sum built from
// joint_probs(pauli_probs(nu), mu).
inline DensityMatrix evolve_closed_form(const DensityMatrix& rho0, double nu,
                                        const DephasingParams& params, double mu) {
    if (rho0.dim() != 4) throw DimensionMismatch("evolve_closed_form: state must be dim 4");
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("evolve_closed_form: mu must be in [0,1]");
    const double f = phi(nu, params);
    const double g = (1.0 - mu) * f * f + mu;
    return DensityMatrix(detail::evolve_entries(rho0.matrix(), f, g));
}

// Choi matrix (I x E)|Omega><Omega| with |Omega> = sum_i |ii>/2. The map is
// CPTP iff the result is PSD and its partial trace over the output factor is
// I/4. For a mixed-Pauli channel the spectrum is the set {p_ij}.
inline ComplexMatrix choi_matrix(const CorrelatedMapSpec& spec) {
    ComplexMatrix choi(16, 16);
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
            ComplexMatrix basis(4, 4);
            basis(k, l) = 1.0;
            const ComplexMatrix mapped = detail::apply_pauli_pair_channel(basis, spec);
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) choi(k * 4 + a, l * 4 + b) = 0.25 * mapped(a, b);
        }
    return choi;
}

}  // namespace memchan
