#include "loqs/ordering.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace loqs;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

const std::vector<double> kOrderGrid{-1.0, -0.5, 0.0, 0.5, 1.0};

}  // namespace

// ---------- expansion between orderings ----------

TEST(SToT, SameOrderIsSingleTerm) {
    const auto terms = s_to_t_expansion(3, 2, 0.5, 0.5);
    ASSERT_EQ(terms.size(), 3u);
    EXPECT_NEAR(std::abs(terms[0].coefficient - Complex(1.0)), 0.0, 1e-15);
    for (std::size_t i = 1; i < terms.size(); ++i) {
        EXPECT_NEAR(std::abs(terms[i].coefficient), 0.0, 1e-15);
    }
}

TEST(SToT, NumberOperatorBetweenNormalAndAntinormal) {
    // {a† a}_1 = {a† a}_-1 + ((t-s)/2) with t = -1, s = 1: coefficient -1
    const auto terms = s_to_t_expansion(1, 1, 1.0, -1.0);
    ASSERT_EQ(terms.size(), 2u);
    EXPECT_NEAR(std::abs(terms[1].coefficient - Complex(-1.0)), 0.0, 1e-15);

    // check against the operator identity a a† = a† a + 1 below the cutoff
    FockSpace space({6});
    const Matrix normal = (creation_op(space, 0) * annihilation_op(space, 0)).m;
    const Matrix anti = (annihilation_op(space, 0) * creation_op(space, 0)).m;
    for (int n = 0; n < 6; ++n) {  // headroom 1
        EXPECT_NEAR(std::abs(normal(n, n) - (anti(n, n) + terms[1].coefficient)), 0.0, 1e-13);
    }
}

TEST(SToT, TermCountIsMinPlusOne) {
    EXPECT_EQ(s_to_t_expansion(2, 1, 1.0, 0.0).size(), 2u);
}

// ---------- s-ordered powers (B2) ----------

TEST(SOrderedPower, NormalOrderFirstPowerIsNumber) {
    FockSpace space({8});
    const auto res = s_ordered_power_of_n(space, 1, 1.0);
    EXPECT_LT(max_abs(res.op.m - number_op(space, 0).m), 1e-13);
}

TEST(SOrderedPower, NormalOrderSecondPowerIsFallingFactorial) {
    // {n̂^2}_1 = a†² a² = n̂² - n̂, via the direct matrix product oracle
    FockSpace space({8});
    const auto res = s_ordered_power_of_n(space, 2, 1.0);
    const OperatorMatrix a = annihilation_op(space, 0);
    const OperatorMatrix ad = creation_op(space, 0);
    const Matrix direct = (ad * ad * a * a).m;
    for (int n = 0; n <= 8; ++n) {
        EXPECT_NEAR(std::abs(res.op.m(n, n) - direct(n, n)), 0.0, 1e-12);
        EXPECT_NEAR(res.op.m(n, n).real(), n * n - n, 1e-12);
    }
}

TEST(SOrderedPower, DiagonalMatchesScalarFormula) {
    FockSpace space({12});
    for (int k = 0; k <= 5; ++k) {
        for (double s : kOrderGrid) {
            const auto res = s_ordered_power_of_n(space, k, s);
            double kfact = 1.0;
            for (int i = 2; i <= k; ++i) kfact *= i;
            for (int n = 0; n <= 12; ++n) {
                double scalar = 0.0;
                for (int l = 0; l <= k; ++l) {
                    scalar += kfact * std::pow((1.0 - s) / 2.0, k - l) * binomial(k, l) *
                              generalized_binomial(n, l);
                }
                EXPECT_NEAR(res.op.m(n, n).real(), scalar, 1e-9 * (1.0 + std::abs(scalar)));
            }
        }
    }
}

// ---------- inverse relation (B3) and the B2/B3 round trip ----------

TEST(PowerFromSOrdered, ZerothPowerIsConstantOne) {
    const auto c = power_of_n_from_s_ordered(0, 0.3);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_NEAR(c[0], 1.0, 1e-14);
}

TEST(PowerFromSOrdered, FirstPowerNormalOrderRoundTrips) {
    const auto c = power_of_n_from_s_ordered(1, 1.0);
    FockSpace space({10});
    Matrix acc = Matrix::Zero(11, 11);
    double lfact = 1.0;
    for (std::size_t l = 0; l < c.size(); ++l) {
        if (l > 1) lfact *= static_cast<double>(l);
        acc += (c[l] / lfact) * s_ordered_power_of_n(space, static_cast<int>(l), 1.0).op.m;
    }
    EXPECT_LT(max_abs(acc - number_op(space, 0).m), 1e-12);
}

TEST(PowerFromSOrdered, RoundTripAcrossGrid) {
    // n̂^k == sum_l (c_l / l!) {n̂^l}_s for k <= 5, s in the grid, cutoff 12
    FockSpace space({12});
    for (int k = 0; k <= 5; ++k) {
        for (double s : kOrderGrid) {
            const auto c = power_of_n_from_s_ordered(k, s);
            Matrix acc = Matrix::Zero(13, 13);
            double lfact = 1.0;
            for (std::size_t l = 0; l < c.size(); ++l) {
                if (l > 1) lfact *= static_cast<double>(l);
                acc += (c[l] / lfact) * s_ordered_power_of_n(space, static_cast<int>(l), s).op.m;
            }
            double residual = 0.0;
            for (int n = 0; n <= 12; ++n) {
                residual = std::max(residual, std::abs(acc(n, n) - std::pow(n, k)));
            }
            EXPECT_LT(residual, 1e-9 * (1.0 + std::pow(12.0, k))) << "k=" << k << " s=" << s;
        }
    }
}

// ---------- s-ordered exponential (B4) ----------

TEST(SOrderedExponential, ZeroExponentIsIdentity) {
    FockSpace space({6});
    const OperatorMatrix e = s_ordered_exponential(space, Complex(0.0), 0.5);
    EXPECT_LT(max_abs(e.m - Matrix::Identity(7, 7)), 1e-14);
}

TEST(SOrderedExponential, NormalOrderClosedForm) {
    // {e^(alpha n̂)}_1 = (1 + alpha)^n̂
    FockSpace space({9});
    const Complex alpha(0.7, -0.2);
    const OperatorMatrix e = s_ordered_exponential(space, alpha, 1.0);
    for (int n = 0; n <= 9; ++n) {
        EXPECT_NEAR(std::abs(e.m(n, n) - cpow_int(1.0 + alpha, n)), 0.0, 1e-12);
    }
}

TEST(SOrderedExponential, AntinormalMatchesTruncatedSeries) {
    // small alpha: sum_k alpha^k/k! {n̂^k}_(-1) converges to the closed form
    FockSpace space({8});
    const Complex alpha(0.06, 0.02);
    const OperatorMatrix closed = s_ordered_exponential(space, alpha, -1.0);
    Matrix series = Matrix::Zero(9, 9);
    Complex coeff(1.0);
    for (int k = 0; k <= 40; ++k) {
        if (k > 0) coeff *= alpha / static_cast<double>(k);
        series += coeff * s_ordered_power_of_n(space, k, -1.0).op.m;
        if (std::abs(coeff) * std::pow(9.0 * 8.0, k <= 1 ? 1 : 1) < 1e-30) break;
    }
    EXPECT_LT(max_abs(closed.m - series), 1e-10);
}

TEST(SOrderedExponential, PoleRejected) {
    FockSpace space({4});
    // s = -1: pole at alpha = 1
    EXPECT_THROW(s_ordered_exponential(space, Complex(1.0), -1.0), std::runtime_error);
}

// ---------- power as s-ordered exponential (B5) and the B4/B5 round trip ----------

TEST(PowerAsExponential, UnitBaseIsTrivial) {
    const auto res = power_as_s_ordered_exponential(Complex(1.0), 0.2);
    EXPECT_NEAR(std::abs(res.exponent), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(res.prefactor - Complex(1.0)), 0.0, 1e-14);
}

TEST(PowerAsExponential, NormalOrderBaseTwo) {
    // 2^n̂ = {e^n̂}_1: exponent (1/(2-1) + 0)^-1 = 1
    const auto res = power_as_s_ordered_exponential(Complex(2.0), 1.0);
    EXPECT_NEAR(std::abs(res.exponent - Complex(1.0)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(res.prefactor - Complex(1.0)), 0.0, 1e-14);
}

TEST(PowerAsExponential, RoundTripAcrossGrid) {
    FockSpace space({12});
    for (const Complex a : {Complex(2.0, 0.0), Complex(0.4, 0.3), Complex(1.5, -0.8)}) {
        for (double s : kOrderGrid) {
            const auto res = power_as_s_ordered_exponential(a, s);
            const OperatorMatrix exp_op = s_ordered_exponential(space, res.exponent, s);
            double residual = 0.0;
            for (int n = 0; n <= 12; ++n) {
                residual = std::max(residual,
                                    std::abs(res.prefactor * exp_op.m(n, n) - cpow_int(a, n)) /
                                        std::abs(cpow_int(a, n)));
            }
            EXPECT_LT(residual, 1e-10) << "a=" << a << " s=" << s;
        }
    }
}

// ---------- the bridge identity used by the synthesis module ----------

TEST(Bridge, TruncatedBinomialSumIsGeometricOnTruncation) {
    // sum_{k<=N} C(n̂,k) (z-1)^k = z^n̂ exactly for n <= N
    FockSpace space({10});
    const Complex z(1.8, 0.6);
    for (int big_n = 0; big_n <= 6; ++big_n) {
        Matrix acc = Matrix::Zero(11, 11);
        for (int k = 0; k <= big_n; ++k) {
            acc += cpow_int(z - 1.0, k) * binomial_of_number_op(space, k).m;
        }
        for (int n = 0; n <= big_n; ++n) {
            EXPECT_NEAR(std::abs(acc(n, n) - cpow_int(z, n)), 0.0,
                        1e-12 * (1.0 + std::abs(cpow_int(z, n))))
                << "N=" << big_n << " n=" << n;
        }
    }
}
