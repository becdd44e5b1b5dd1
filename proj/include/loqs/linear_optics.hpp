#pragma once
// Beam-splitter and phase-shifter unitaries in the (T, R, P) convention
//
//   U† (a_j, a_k)ᵀ U = P [[T, R], [-R*, T*]] (a_j, a_k)ᵀ,   |T|²+|R|² = |P|² = 1.
//
// The Schrödinger-picture matrix is built as phase-shifter dressings around
// the exponential of the anti-Hermitian generator θ(e^{iδ} a_j†a_k − h.c.),
// with (θ, δ, dressings) solved from (T, R, P). The mapping is validated
// numerically by heisenberg_residual rather than trusted.
//
// On a truncated space the relation holds exactly only on the photon-number
// conserving "safe" subspace n_j + n_k <= min(D_j, D_k); everything here is
// asserted there.

#include "loqs/fock.hpp"
#include "loqs/matrix_exp.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace loqs {

struct BeamSplitterParams {
    Complex T;
    Complex R;
    Complex P{1.0, 0.0};  // defaults to a trivial phase

    void validate() const {
        if (std::abs(std::norm(T) + std::norm(R) - 1.0) > 1e-12) {
            throw std::invalid_argument("BeamSplitterParams: |T|^2 + |R|^2 != 1");
        }
        if (std::abs(std::norm(P) - 1.0) > 1e-12) {
            throw std::invalid_argument("BeamSplitterParams: |P| != 1");
        }
    }
};

inline BeamSplitterParams balanced_bs() {
    return {Complex(1.0 / std::sqrt(2.0)), Complex(1.0 / std::sqrt(2.0)), Complex(1.0)};
}

// U(p2) * U(p1) = U(compose_params(p2, p1)); p1 acts first.
inline BeamSplitterParams compose_params(const BeamSplitterParams& p2,
                                         const BeamSplitterParams& p1) {
    p1.validate();
    p2.validate();
    return {p2.T * p1.T - p2.R * std::conj(p1.R), p2.T * p1.R + p2.R * std::conj(p1.T),
            p2.P * p1.P};
}

namespace detail {

// Two-mode beam-splitter matrix on the pair space (j first, k second).
inline Matrix two_mode_bs(int cutoff_j, int cutoff_k, const BeamSplitterParams& p) {
    p.validate();
    const double theta = std::atan2(std::abs(p.R), std::abs(p.T));
    const double tau = std::arg(p.T);
    const double rho = std::arg(p.R);
    const double chi = std::arg(p.P);
    const double delta = rho - tau;

    FockSpace pair({cutoff_j, cutoff_k});
    const Matrix hop_jk = creation_op(pair, 0).m * annihilation_op(pair, 1).m;  // a_j† a_k
    const Matrix gen =
        theta * (std::polar(1.0, delta) * hop_jk - std::polar(1.0, -delta) * hop_jk.adjoint());
    Matrix u = matrix_exp(gen);

    // Dressing phases e^{i(chi+tau) n_j} e^{i(chi-tau) n_k} on the left.
    for (std::size_t r = 0; r < pair.dim(); ++r) {
        const MultiIndex idx = pair.unrank(r);
        const double phase = (chi + tau) * idx[0] + (chi - tau) * idx[1];
        u.row(static_cast<Eigen::Index>(r)) *= std::polar(1.0, phase);
    }
    return u;
}

}  // namespace detail

// Beam-splitter unitary coupling modes j and k of `space`, identity elsewhere.
inline OperatorMatrix bs_unitary(const FockSpace& space, int j, int k,
                                 const BeamSplitterParams& params) {
    if (j == k) throw std::invalid_argument("bs_unitary: modes must differ");
    return embed_operator(space, {j, k}, detail::two_mode_bs(space.cutoff(j), space.cutoff(k), params));
}

inline OperatorMatrix phase_shifter(const FockSpace& space, int mode, double phi) {
    return diagonal_op(space, [&](const MultiIndex& idx) {
        return std::polar(1.0, phi * idx[static_cast<std::size_t>(mode)]);
    });
}

// Max-norm residual of the defining Heisenberg relation, restricted to input
// columns in the photon-conserving safe subspace n_j + n_k <= min(D_j, D_k).
inline double heisenberg_residual(const OperatorMatrix& u, const BeamSplitterParams& params,
                                  int j, int k) {
    params.validate();
    const FockSpace& space = u.in_space;
    if (u.out_space != space) throw std::invalid_argument("heisenberg_residual: non-square operator");
    const Matrix aj = annihilation_op(space, j).m;
    const Matrix ak = annihilation_op(space, k).m;
    const Matrix lhs_j = u.m.adjoint() * aj * u.m;
    const Matrix lhs_k = u.m.adjoint() * ak * u.m;
    const Matrix rhs_j = params.P * (params.T * aj + params.R * ak);
    const Matrix rhs_k = params.P * (-std::conj(params.R) * aj + std::conj(params.T) * ak);

    const int safe_total = std::min(space.cutoff(j), space.cutoff(k));
    double residual = 0.0;
    for (std::size_t c = 0; c < space.dim(); ++c) {
        if (space.occupation(c, j) + space.occupation(c, k) > safe_total) continue;
        residual = std::max(residual,
                            (lhs_j.col(static_cast<Eigen::Index>(c)) - rhs_j.col(static_cast<Eigen::Index>(c)))
                                .cwiseAbs()
                                .maxCoeff());
        residual = std::max(residual,
                            (lhs_k.col(static_cast<Eigen::Index>(c)) - rhs_k.col(static_cast<Eigen::Index>(c)))
                                .cwiseAbs()
                                .maxCoeff());
    }
    return residual;
}

// Factorized form (PT)^{n_j} exp(-PR* a_k†a_j) exp(P*R a_j†a_k) (P*T)^{-n_k}.
// Singular at T = 0 (a mirror); build that limit by composition instead.
inline OperatorMatrix bs_factorized(const FockSpace& space, int j, int k, Complex t, Complex r,
                                    Complex p) {
    if (j == k) throw std::invalid_argument("bs_factorized: modes must differ");
    if (std::abs(t) < 1e-12) {
        throw std::invalid_argument("bs_factorized: singular at T = 0, use compose_params");
    }
    FockSpace pair({space.cutoff(j), space.cutoff(k)});
    const Matrix hop_kj = creation_op(pair, 1).m * annihilation_op(pair, 0).m;  // a_k† a_j
    const Matrix hop_jk = hop_kj.adjoint();                                      // a_j† a_k
    Matrix m = matrix_exp(-p * std::conj(r) * hop_kj) * matrix_exp(std::conj(p) * r * hop_jk);
    // diagonal dressings
    for (std::size_t rr = 0; rr < pair.dim(); ++rr) {
        const MultiIndex idx = pair.unrank(rr);
        m.row(static_cast<Eigen::Index>(rr)) *= cpow_int(p * t, idx[0]);
        m.col(static_cast<Eigen::Index>(rr)) *= cpow_int(std::conj(p) * t, -idx[1]);
    }
    return embed_operator(space, {j, k}, m);
}

}  // namespace loqs
