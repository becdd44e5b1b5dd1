#pragma once
// s-ordered powers and exponentials of the photon number operator n̂ and
// their inverses, evaluated as diagonal operators on a truncated single-mode
// space. s = 1, 0, -1 are normal, symmetric and anti-normal order. The
// binomial C(n̂, l) with operator argument is the falling-factorial diagonal.

#include "loqs/fock.hpp"

#include <cmath>
#include <vector>

namespace loqs {

inline double binomial(int n, int k) {
    if (k < 0 || (n >= 0 && k > n)) return 0.0;
    double acc = 1.0;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

// C(x, k) = x (x-1) ... (x-k+1) / k! for scalar x.
inline double generalized_binomial(double x, int k) {
    if (k < 0) return 0.0;
    double acc = 1.0;
    for (int i = 0; i < k; ++i) acc *= (x - i) / (k - i);
    return acc;
}

// C(n̂, k) as a diagonal operator on a single-mode space.
inline OperatorMatrix binomial_of_number_op(const FockSpace& space, int k) {
    if (space.num_modes() != 1) {
        throw std::invalid_argument("binomial_of_number_op: single-mode space expected");
    }
    return diagonal_op(space, [&](const MultiIndex& idx) {
        return Complex(generalized_binomial(static_cast<double>(idx[0]), k), 0.0);
    });
}

struct OrderedTerm {
    Complex coefficient;
    int dagger_power;  // m - k
    int a_power;       // n - k
};

// {a†^m a^n}_s = sum_k k! C(m,k) C(n,k) ((t-s)/2)^k {a†^(m-k) a^(n-k)}_t.
inline std::vector<OrderedTerm> s_to_t_expansion(int m, int n, double s, double t) {
    if (m < 0 || n < 0) throw std::invalid_argument("s_to_t_expansion: negative powers");
    std::vector<OrderedTerm> terms;
    double kfact = 1.0;
    for (int k = 0; k <= std::min(m, n); ++k) {
        if (k > 0) kfact *= k;
        const double coeff =
            kfact * binomial(m, k) * binomial(n, k) * std::pow((t - s) / 2.0, k);
        terms.push_back({Complex(coeff, 0.0), m - k, n - k});
    }
    return terms;
}

struct SOrderedPower {
    OperatorMatrix op;                   // diagonal on the given space
    std::vector<double> binom_coeffs;    // over C(n̂, l), l = 0..k
};

// {n̂^k}_s = k! sum_l ((1-s)/2)^(k-l) C(k,l) C(n̂,l).
inline SOrderedPower s_ordered_power_of_n(const FockSpace& space, int k, double s) {
    if (k < 0) throw std::invalid_argument("s_ordered_power_of_n: negative power");
    if (s < -1.0 || s > 1.0) throw std::invalid_argument("s_ordered_power_of_n: s outside [-1, 1]");
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    std::vector<double> coeffs(static_cast<std::size_t>(k) + 1);
    for (int l = 0; l <= k; ++l) {
        coeffs[static_cast<std::size_t>(l)] =
            kfact * std::pow((1.0 - s) / 2.0, k - l) * binomial(k, l);
    }
    OperatorMatrix op = diagonal_op(space, [&](const MultiIndex& idx) {
        double acc = 0.0;
        for (int l = 0; l <= k; ++l) {
            acc += coeffs[static_cast<std::size_t>(l)] *
                   generalized_binomial(static_cast<double>(idx[0]), l);
        }
        return Complex(acc, 0.0);
    });
    return {std::move(op), std::move(coeffs)};
}

// n̂^k as an s-ordered polynomial: n̂^k = { sum_l c_l n̂^l / l! }_s with
// c_l = sum_{m,j} C(j,m) C(j,l) (-1)^(m+j) m^k ((s-1)/2)^(j-l).
inline std::vector<double> power_of_n_from_s_ordered(int k, double s) {
    if (k < 0) throw std::invalid_argument("power_of_n_from_s_ordered: negative power");
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    for (int l = 0; l <= k; ++l) {
        double acc = 0.0;
        for (int j = l; j <= k; ++j) {
            for (int m = 0; m <= j; ++m) {
                const double mk = (m == 0 && k == 0) ? 1.0 : std::pow(static_cast<double>(m), k);
                acc += binomial(j, m) * binomial(j, l) * std::pow(-1.0, m + j) * mk *
                       std::pow((s - 1.0) / 2.0, j - l);
            }
        }
        c[static_cast<std::size_t>(l)] = acc;
    }
    return c;
}

// {e^(alpha n̂)}_s = (1 + (s+1) alpha / 2)^n̂ / (1 + (s-1) alpha / 2)^(n̂+1).
inline OperatorMatrix s_ordered_exponential(const FockSpace& space, Complex alpha, double s) {
    if (space.num_modes() != 1) {
        throw std::invalid_argument("s_ordered_exponential: single-mode space expected");
    }
    const Complex denom_base = 1.0 + (s - 1.0) * alpha / 2.0;
    if (std::abs(denom_base) < 1e-12) {
        throw std::runtime_error("s_ordered_exponential: pole at 1 + (s-1) alpha / 2 = 0");
    }
    const Complex num_base = 1.0 + (s + 1.0) * alpha / 2.0;
    return diagonal_op(space, [&](const MultiIndex& idx) {
        const int n = idx[0];
        return cpow_int(num_base, n) / cpow_int(denom_base, n + 1);
    });
}

struct PowerAsExponential {
    Complex exponent;
    Complex prefactor;
};

// a^n̂ = { prefactor e^(exponent n̂) }_s with
// exponent = (1/(a-1) + (1-s)/2)^-1 and prefactor = (1 + (1-s)(a-1)/2)^-1.
inline PowerAsExponential power_as_s_ordered_exponential(Complex a, double s) {
    if (std::abs(a - 1.0) < 1e-14) return {Complex(0.0), Complex(1.0)};
    const Complex inv = 1.0 / (a - 1.0) + (1.0 - s) / 2.0;
    const Complex pref_denom = 1.0 + (1.0 - s) * (a - 1.0) / 2.0;
    if (std::abs(inv) < 1e-12 || std::abs(pref_denom) < 1e-12) {
        throw std::runtime_error("power_as_s_ordered_exponential: vanishing denominator");
    }
    return {1.0 / inv, 1.0 / pref_denom};
}

}  // namespace loqs
