#pragma once
// The local device: two beam splitters U_01(T1,R1), U_21(T2,R2) and two
// photodetectors, implementing conditional photon subtraction (case 0) or
// addition (case 1) on the signal in mode 0, controlled by the photon number
// s of the ancilla Fock state. Both the brute-force network conditioning and
// the closed forms
//
//   case 0:  Y = R2 (T2/R2)^s  T1^{n̂} (-R1* a)^{1-s}
//   case 1:  Y = T1^{n̂} (R1 a†/T1)^s
//
// are provided; they are cross-checked against each other in the tests.

#include "loqs/fock.hpp"
#include "loqs/network.hpp"

#include <map>
#include <vector>

namespace loqs {

struct DetectionPattern {
    std::map<int, int> counts;
};

struct DeviceSpec {
    int case_tag = 0;  // 0: subtraction wiring, 1: addition wiring
    int s = 0;         // photon number of the control Fock state
    Complex T1, R1, T2, R2;

    void validate() const {
        if (case_tag != 0 && case_tag != 1) throw std::invalid_argument("DeviceSpec: case_tag");
        if (s != 0 && s != 1) throw std::invalid_argument("DeviceSpec: s must be 0 or 1");
        BeamSplitterParams{T1, R1}.validate();
        BeamSplitterParams{T2, R2}.validate();
    }
};

// General conditioning rule: network + preparations + detection pattern give
// the conditional operator on the surviving signal modes. The signal modes
// must be exactly the unprepared inputs.
inline OperatorMatrix conditional_operator(const OperatorMatrix& net,
                                           const std::vector<PrepAssignment>& preps,
                                           const DetectionPattern& pattern,
                                           const std::vector<int>& signal_modes) {
    std::vector<bool> prepped(static_cast<std::size_t>(net.in_space.num_modes()), false);
    for (const auto& p : preps) {
        for (int m : p.modes) prepped[static_cast<std::size_t>(m)] = true;
    }
    for (int m : signal_modes) {
        if (m < 0 || m >= net.in_space.num_modes() || prepped[static_cast<std::size_t>(m)]) {
            throw std::invalid_argument("conditional_operator: signal mode overlaps preparation");
        }
    }
    std::size_t expected = 0;
    for (const auto& p : preps) expected += p.modes.size();
    if (expected + signal_modes.size() != static_cast<std::size_t>(net.in_space.num_modes())) {
        throw std::invalid_argument("conditional_operator: signal modes must cover all unprepared inputs");
    }
    std::map<int, int> bra = pattern.counts;
    return contract(net, preps, [&] {
        std::vector<BraAssignment> bras;
        for (const auto& [mode, count] : bra) {
            FockSpace one({net.out_space.cutoff(mode)});
            bras.push_back({{mode}, fock_state(one, {count})});
        }
        return bras;
    }());
}

// p = <psi| Y†Y |psi>. For Y = alpha * U with U unitary this is |alpha|^2
// independent of the input; that is asserted as a property in the tests.
inline double success_probability(const OperatorMatrix& y, const StateVector& psi) {
    if (psi.space != y.in_space) throw std::invalid_argument("success_probability: space mismatch");
    return (y.m * psi.amps).squaredNorm();
}

// Closed-form device operator on a single-mode signal space.
inline OperatorMatrix device_closed_form(const FockSpace& signal_space, const DeviceSpec& spec) {
    spec.validate();
    if (signal_space.num_modes() != 1) {
        throw std::invalid_argument("device_closed_form: single-mode signal space expected");
    }
    const OperatorMatrix a = annihilation_op(signal_space, 0);
    if (spec.case_tag == 0) {
        if (spec.s == 1 && std::abs(spec.R2) < 1e-12) {
            throw std::invalid_argument("device_closed_form: R2 = 0 is singular in case 0, s = 1");
        }
        const Complex prefactor =
            spec.R2 * (spec.s == 1 ? spec.T2 / spec.R2 : Complex(1.0));
        OperatorMatrix y = prefactor * power_of_number_op(signal_space, 0, spec.T1);
        if (spec.s == 0) y = y * (Complex(-std::conj(spec.R1)) * a);
        return y;
    }
    // case 1
    if (spec.s == 1 && std::abs(spec.T1) < 1e-12) {
        throw std::invalid_argument("device_closed_form: T1 = 0 is singular in case 1, s = 1");
    }
    OperatorMatrix y = power_of_number_op(signal_space, 0, spec.T1);
    if (spec.s == 1) y = y * ((spec.R1 / spec.T1) * adjoint(a));
    return y;
}

// The local-device wiring as a circuit on a 3-mode space (0 signal, 1 and 2
// ancillas): U_01 followed by U_21.
inline Circuit device_circuit(const DeviceSpec& spec) {
    Circuit c;
    c.elements.push_back(BsElement{0, 1, {spec.T1, spec.R1}});
    c.elements.push_back(BsElement{2, 1, {spec.T2, spec.R2}});
    return c;
}

// Brute-force device operator: build the 3-mode network, feed the case's
// ancilla preparations and project its detection pattern.
//   case 0: mode 1 <- |0>, mode 2 <- |s>, detect (D1, D2) = (0, 1)
//   case 1: mode 1 <- |s>, mode 2 <- |0>, detect (D1, D2) = (0, 0)
inline OperatorMatrix device_conditional(const DeviceSpec& spec, int signal_cutoff,
                                         int ancilla_cutoff) {
    spec.validate();
    FockSpace space({signal_cutoff, ancilla_cutoff, ancilla_cutoff});
    FockSpace one({ancilla_cutoff});
    std::vector<PrepAssignment> preps;
    std::map<int, int> pattern;
    if (spec.case_tag == 0) {
        preps.push_back({{1}, fock_state(one, {0})});
        preps.push_back({{2}, fock_state(one, {spec.s})});
        pattern = {{1, 0}, {2, 1}};
    } else {
        preps.push_back({{1}, fock_state(one, {spec.s})});
        preps.push_back({{2}, fock_state(one, {0})});
        pattern = {{1, 0}, {2, 0}};
    }
    return conditional_from_circuit(device_circuit(spec), space, preps, pattern);
}

}  // namespace loqs
