#pragma once
// Ordered element lists (beam splitters, phase shifters, cross-Kerr couplers)
// plus state evolution and column-wise conditioning. Building conditional
// operators column by column through state evolution avoids materializing
// full network matrices on larger spaces.

#include "loqs/fock.hpp"
#include "loqs/linear_optics.hpp"

#include <map>
#include <variant>
#include <vector>

namespace loqs {

struct BsElement {
    int mode_j;
    int mode_k;
    BeamSplitterParams params;
};

struct PhaseElement {
    int mode;
    double phi;
};

// Diagonal two-mode coupler e^{i phi n_j n_k}. Used by the cloner reference
// networks; the synthesized schedules are what emulate it with linear optics.
struct CrossKerrElement {
    int mode_j;
    int mode_k;
    double phi;
};

using CircuitElement = std::variant<BsElement, PhaseElement, CrossKerrElement>;

struct Circuit {
    std::vector<CircuitElement> elements;  // applied in order
};

inline void apply_in_place(Vector& amps, const FockSpace& space, const CircuitElement& el) {
    if (const auto* bs = std::get_if<BsElement>(&el)) {
        apply_embedded(amps, space, {bs->mode_j, bs->mode_k},
                       detail::two_mode_bs(space.cutoff(bs->mode_j), space.cutoff(bs->mode_k),
                                           bs->params));
    } else if (const auto* ph = std::get_if<PhaseElement>(&el)) {
        for (std::size_t r = 0; r < space.dim(); ++r) {
            amps(static_cast<Eigen::Index>(r)) *=
                std::polar(1.0, ph->phi * space.occupation(r, ph->mode));
        }
    } else if (const auto* xk = std::get_if<CrossKerrElement>(&el)) {
        for (std::size_t r = 0; r < space.dim(); ++r) {
            amps(static_cast<Eigen::Index>(r)) *= std::polar(
                1.0, xk->phi * space.occupation(r, xk->mode_j) * space.occupation(r, xk->mode_k));
        }
    }
}

inline StateVector apply_circuit(const Circuit& c, StateVector psi) {
    for (const auto& el : c.elements) apply_in_place(psi.amps, psi.space, el);
    return psi;
}

// Full network matrix; only sensible on small spaces.
inline OperatorMatrix circuit_operator(const Circuit& c, const FockSpace& space) {
    OperatorMatrix u = identity_op(space);
    for (const auto& el : c.elements) {
        if (const auto* bs = std::get_if<BsElement>(&el)) {
            u = bs_unitary(space, bs->mode_j, bs->mode_k, bs->params) * u;
        } else if (const auto* ph = std::get_if<PhaseElement>(&el)) {
            u = phase_shifter(space, ph->mode, ph->phi) * u;
        } else if (const auto* xk = std::get_if<CrossKerrElement>(&el)) {
            u = diagonal_op(space, [&](const MultiIndex& idx) {
                    return std::polar(1.0, xk->phi * idx[static_cast<std::size_t>(xk->mode_j)] *
                                               idx[static_cast<std::size_t>(xk->mode_k)]);
                }) * u;
        }
    }
    return u;
}

// Conditional operator of a circuit: signal columns are evolved one by one,
// then the detection pattern is projected out. Equivalent to
// contract(circuit_operator(...), ...) but linear instead of cubic in the
// space dimension.
inline OperatorMatrix conditional_from_circuit(const Circuit& circuit, const FockSpace& space,
                                               const std::vector<PrepAssignment>& preps,
                                               const std::map<int, int>& pattern) {
    const std::vector<bool> in_removed = detail::removal_mask(space, preps, "prep");
    std::vector<PrepAssignment> none;
    std::vector<bool> out_removed(static_cast<std::size_t>(space.num_modes()), false);
    std::size_t bra_offset = 0;
    for (const auto& [mode, count] : pattern) {
        if (mode < 0 || mode >= space.num_modes()) {
            throw std::invalid_argument("conditional_from_circuit: bad pattern mode");
        }
        if (count < 0 || count > space.cutoff(mode)) {
            throw std::invalid_argument("conditional_from_circuit: pattern count outside cutoff");
        }
        if (out_removed[static_cast<std::size_t>(mode)]) {
            throw std::invalid_argument("conditional_from_circuit: overlapping pattern modes");
        }
        out_removed[static_cast<std::size_t>(mode)] = true;
        bra_offset += static_cast<std::size_t>(count) * space.stride(mode);
    }

    const detail::ModeSplit in_split(space, in_removed);
    const detail::ModeSplit out_split(space, out_removed);
    const auto prep_support = detail::assignment_support(space, preps, false);

    const std::size_t din = in_split.reduced.dim();
    const std::size_t dout = out_split.reduced.dim();
    Matrix y = Matrix::Zero(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(din));

    for (std::size_t i = 0; i < din; ++i) {
        Vector column = Vector::Zero(static_cast<Eigen::Index>(space.dim()));
        const std::size_t in_base = in_split.offset(i);
        for (const auto& p : prep_support) {
            column(static_cast<Eigen::Index>(in_base + p.offset)) += p.weight;
        }
        for (const auto& el : circuit.elements) apply_in_place(column, space, el);
        for (std::size_t o = 0; o < dout; ++o) {
            y(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) =
                column(static_cast<Eigen::Index>(out_split.offset(o) + bra_offset));
        }
    }
    return OperatorMatrix(in_split.reduced, out_split.reduced, std::move(y));
}

}  // namespace loqs
