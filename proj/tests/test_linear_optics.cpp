#include "loqs/linear_optics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace loqs;

namespace {

BeamSplitterParams random_params(std::mt19937_64& rng, bool random_phase = true) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    const double t = std::sqrt(unit(rng));
    const double r = std::sqrt(1.0 - t * t);
    BeamSplitterParams p;
    p.T = std::polar(t, angle(rng));
    p.R = std::polar(r, angle(rng));
    p.P = random_phase ? std::polar(1.0, angle(rng)) : Complex(1.0);
    return p;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// max |(A-B) * P_safe| over columns in the photon-conserving safe subspace
double safe_column_residual(const FockSpace& space, int j, int k, const Matrix& a,
                            const Matrix& b) {
    const int safe_total = std::min(space.cutoff(j), space.cutoff(k));
    double res = 0.0;
    for (std::size_t c = 0; c < space.dim(); ++c) {
        if (space.occupation(c, j) + space.occupation(c, k) > safe_total) continue;
        res = std::max(res, (a.col(static_cast<Eigen::Index>(c)) - b.col(static_cast<Eigen::Index>(c)))
                                .cwiseAbs()
                                .maxCoeff());
    }
    return res;
}

}  // namespace

// ---------- matrix exponential ----------

TEST(MatrixExp, DiagonalCase) {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = Complex(0.3, 0.0);
    d(1, 1) = Complex(0.0, 1.2);
    d(2, 2) = Complex(-2.0, 0.5);
    const Matrix e = matrix_exp(d);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(std::abs(e(i, i) - std::exp(d(i, i))), 0.0, 1e-13);
    }
}

TEST(MatrixExp, InverseProperty) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix a(4, 4);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) a(r, c) = Complex(dist(rng), dist(rng));
    }
    const Matrix prod = matrix_exp(a) * matrix_exp((-a).eval());
    EXPECT_LT(max_abs(prod - Matrix::Identity(4, 4)), 1e-12);
}

TEST(MatrixExp, AntiHermitianGivesUnitary) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix h(5, 5);
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 5; ++c) h(r, c) = Complex(dist(rng), dist(rng));
    }
    const Matrix g = h - h.adjoint().eval();
    const Matrix u = matrix_exp(g);
    EXPECT_LT(max_abs(u.adjoint() * u - Matrix::Identity(5, 5)), 1e-12);
}

// ---------- beam splitter ----------

TEST(BeamSplitter, IdentityParams) {
    FockSpace space({4, 4});
    const OperatorMatrix u = bs_unitary(space, 0, 1, {Complex(1.0), Complex(0.0), Complex(1.0)});
    EXPECT_LT(max_abs(u.m - Matrix::Identity(u.m.rows(), u.m.cols())), 1e-12);
}

TEST(BeamSplitter, BalancedSplitsSinglePhoton) {
    // U(T = -R = 1/sqrt2) |1,0> = (|0,1> + |1,0>)/sqrt2
    FockSpace space({2, 2});
    BeamSplitterParams p{Complex(1.0 / std::sqrt(2.0)), Complex(-1.0 / std::sqrt(2.0))};
    const OperatorMatrix u = bs_unitary(space, 0, 1, p);
    const StateVector out = apply(u, fock_state(space, {1, 0}));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(std::abs(out.amps(static_cast<Eigen::Index>(space.rank({1, 0}))) - inv_sqrt2), 0.0,
                1e-12);
    EXPECT_NEAR(std::abs(out.amps(static_cast<Eigen::Index>(space.rank({0, 1}))) - inv_sqrt2), 0.0,
                1e-12);
    EXPECT_NEAR(out.norm2(), 1.0, 1e-12);
}

TEST(BeamSplitter, HeisenbergResidualSmallForRandomParams) {
    std::mt19937_64 rng(17);
    FockSpace space({6, 6});
    for (int trial = 0; trial < 100; ++trial) {
        const BeamSplitterParams p = random_params(rng);
        const OperatorMatrix u = bs_unitary(space, 0, 1, p);
        EXPECT_LT(heisenberg_residual(u, p, 0, 1), 1e-10);
    }
}

TEST(BeamSplitter, HeisenbergResidualIdentity) {
    FockSpace space({4, 4});
    BeamSplitterParams id{Complex(1.0), Complex(0.0)};
    EXPECT_LT(heisenberg_residual(bs_unitary(space, 0, 1, id), id, 0, 1), 1e-14);
}

TEST(BeamSplitter, SignFlippedReflectanceDetected) {
    FockSpace space({4, 4});
    BeamSplitterParams p = balanced_bs();
    const OperatorMatrix u = bs_unitary(space, 0, 1, p);
    BeamSplitterParams flipped = p;
    flipped.R = -flipped.R;
    EXPECT_GT(heisenberg_residual(u, flipped, 0, 1), 0.5);
}

TEST(BeamSplitter, UnitaryOnSafeSubspace) {
    std::mt19937_64 rng(41);
    FockSpace space({6, 6});
    for (int trial = 0; trial < 20; ++trial) {
        const BeamSplitterParams p = random_params(rng);
        const OperatorMatrix u = bs_unitary(space, 0, 1, p);
        const Matrix gram = u.m.adjoint() * u.m;
        EXPECT_LT(safe_column_residual(space, 0, 1, gram,
                                       Matrix::Identity(gram.rows(), gram.cols())),
                  1e-10);
    }
}

TEST(BeamSplitter, ThirdModeUntouched) {
    FockSpace space({2, 2, 2});
    const OperatorMatrix u = bs_unitary(space, 0, 2, balanced_bs());
    const StateVector psi = apply(u, fock_state(space, {0, 1, 0}));
    EXPECT_NEAR(std::abs(psi.amps(static_cast<Eigen::Index>(space.rank({0, 1, 0}))) - Complex(1.0)),
                0.0, 1e-12);
}

// ---------- factorized form ----------

TEST(BsFactorized, IdentityParams) {
    FockSpace space({4, 4});
    const OperatorMatrix u = bs_factorized(space, 0, 1, Complex(1.0), Complex(0.0), Complex(1.0));
    EXPECT_LT(max_abs(u.m - Matrix::Identity(u.m.rows(), u.m.cols())), 1e-12);
}

TEST(BsFactorized, MatchesBsUnitaryOnSafeSubspace) {
    std::mt19937_64 rng(53);
    FockSpace space({6, 6});
    for (int trial = 0; trial < 100; ++trial) {
        const BeamSplitterParams p = random_params(rng);
        const OperatorMatrix via_exp = bs_unitary(space, 0, 1, p);
        const OperatorMatrix via_fact = bs_factorized(space, 0, 1, p.T, p.R, p.P);
        EXPECT_LT(safe_column_residual(space, 0, 1, via_exp.m, via_fact.m), 1e-10);
    }
}

TEST(BsFactorized, SingularAtZeroTransmittance) {
    FockSpace space({3, 3});
    EXPECT_THROW(bs_factorized(space, 0, 1, Complex(0.0), Complex(1.0), Complex(1.0)),
                 std::invalid_argument);
}

// ---------- composition ----------

TEST(ComposeParams, BalancedPairGivesQuantumMirror) {
    const BeamSplitterParams p = balanced_bs();
    const BeamSplitterParams mirror = compose_params(p, p);
    EXPECT_NEAR(std::abs(mirror.T), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(mirror.R - Complex(1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(mirror.P - Complex(1.0)), 0.0, 1e-15);
}

TEST(ComposeParams, IdentityLeavesUnchanged) {
    std::mt19937_64 rng(59);
    const BeamSplitterParams p = random_params(rng);
    const BeamSplitterParams q = compose_params({Complex(1.0), Complex(0.0)}, p);
    EXPECT_NEAR(std::abs(q.T - p.T), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(q.R - p.R), 0.0, 1e-15);
}

TEST(ComposeParams, InvariantHoldsForRandomPairs) {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 200; ++trial) {
        const BeamSplitterParams q = compose_params(random_params(rng), random_params(rng));
        EXPECT_NO_THROW(q.validate());
    }
}

TEST(ComposeParams, MatrixProductMatchesComposedParams) {
    std::mt19937_64 rng(67);
    FockSpace space({5, 5});
    for (int trial = 0; trial < 20; ++trial) {
        const BeamSplitterParams p1 = random_params(rng);
        const BeamSplitterParams p2 = random_params(rng);
        const OperatorMatrix product = bs_unitary(space, 0, 1, p2) * bs_unitary(space, 0, 1, p1);
        const OperatorMatrix direct = bs_unitary(space, 0, 1, compose_params(p2, p1));
        EXPECT_LT(safe_column_residual(space, 0, 1, product.m, direct.m), 1e-10);
    }
}

// ---------- phase shifter ----------

TEST(PhaseShifter, Basics) {
    FockSpace space({3});
    EXPECT_LT(max_abs(phase_shifter(space, 0, 0.0).m - Matrix::Identity(4, 4)), 1e-15);

    const OperatorMatrix pi_shift = phase_shifter(space, 0, M_PI);
    const StateVector out = apply(pi_shift, fock_state(space, {1}));
    EXPECT_NEAR(std::abs(out.amps(1) - Complex(-1.0)), 0.0, 1e-12);

    const OperatorMatrix u = phase_shifter(space, 0, 0.37);
    EXPECT_LT(max_abs((u.m.adjoint() * u.m) - Matrix::Identity(4, 4)), 1e-12);
}
