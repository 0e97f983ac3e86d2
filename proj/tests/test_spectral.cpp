#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace spns;
using namespace spns::testing;

namespace {

const Grid kGrid(kTwoPi, 32);

TEST(Grid, RejectsBadParameters) {
    EXPECT_THROW(Grid(0.0, 32), std::invalid_argument);
    EXPECT_THROW(Grid(kTwoPi, 7), std::invalid_argument);
    EXPECT_THROW(Grid(kTwoPi, 6), std::invalid_argument);
    EXPECT_THROW(Grid(kTwoPi, 32, 1.2), std::invalid_argument);
}

TEST(Grid, ModeLayoutRoundtrips) {
    const Grid g(kTwoPi, 16);
    for (int n = -8; n < 8; ++n) EXPECT_EQ(g.mode(g.index_of(n)), n);
    EXPECT_GE(g.padded(), 24);
}

TEST(Gradient, CosineGivesMinusKappaSine) {
    // f = cos(kappa.x), kappa = (2pi/L, 0)  ->  (-kappa_1 sin(kappa.x), 0)
    for (double L : {kTwoPi, 1.7}) {
        const Grid g(L, 32);
        const double kap = kTwoPi / L;
        SpectralVector got = gradient(make_cos(g, 1, 0));
        SpectralVector want(g);
        want.x() = make_sin(g, 1, 0, -kap);
        EXPECT_LT(rel_err(got, want), 1e-14) << "L=" << L;
        EXPECT_LT(l2_norm(got.y()), 1e-14);
    }
}

TEST(Gradient, ZeroMapsToZero) {
    SpectralScalar f(kGrid);
    EXPECT_EQ(l2_norm(gradient(f)), 0.0);
}

TEST(Gradient, DivergenceOfGradientIsLaplacian) {
    SpectralScalar f = random_scalar(kGrid, 7);
    SpectralScalar got = divergence(gradient(f));
    SpectralScalar want = laplacian(f);
    EXPECT_LT(rel_err(got, want), 1e-12);
}

TEST(Divergence, CrossComponentsAreSolenoidal) {
    // u = (sin(kappa_2 y), sin(kappa_1 x)): each component independent of its
    // own coordinate.
    SpectralVector u(kGrid);
    u.x() = make_sin(kGrid, 0, 1);
    u.y() = make_sin(kGrid, 1, 0);
    EXPECT_LT(l2_norm(divergence(u)), 1e-14);
}

TEST(Divergence, LerayProjectionAnnihilatesDivergence) {
    SpectralVector w = random_solenoidal(kGrid, 11) + gradient(random_scalar(kGrid, 12));
    SpectralVector pw = leray_project(w);
    EXPECT_LT(l2_norm(divergence(pw)), 1e-12 * h1_norm(w));
}

TEST(Laplacian, SingleModeEigenvalue) {
    const Grid g(kTwoPi, 32);
    SpectralScalar f = make_cos(g, 2, 3);
    SpectralScalar got = laplacian(f);
    SpectralScalar want = f;
    want *= -(4.0 + 9.0);
    EXPECT_LT(rel_err(got, want), 1e-14);
}

TEST(Laplacian, ZeroMapsToZero) {
    SpectralScalar f(kGrid);
    EXPECT_EQ(l2_norm(laplacian(f)), 0.0);
}

TEST(Laplacian, InverseRoundtrips) {
    SpectralScalar f = random_scalar(kGrid, 21);
    EXPECT_LT(rel_err(inv_laplacian(laplacian(f)), f), 1e-12);
    EXPECT_LT(rel_err(laplacian(inv_laplacian(f)), f), 1e-12);
}

TEST(InvLaplacian, SingleModeScaling) {
    // e^{i kappa.x} + conj -> -1/|kappa|^2 times itself
    SpectralScalar f = make_cos(kGrid, 1, 2);
    SpectralScalar want = f;
    want *= -1.0 / 5.0;
    EXPECT_LT(rel_err(inv_laplacian(f), want), 1e-14);
}

TEST(InvLaplacian, MatchesNegativeOneNormExactly) {
    // (A^{-1}u, u) with A = -Laplacian equals ||u||_{-1}^2 on the nose.
    SpectralScalar u = random_scalar(kGrid, 31);
    const double lhs = -inner(inv_laplacian(u), u);
    const double rhs = sobolev_norm(u, -1.0) * sobolev_norm(u, -1.0);
    EXPECT_NEAR(lhs, rhs, 1e-13 * rhs);
}

TEST(InvLaplacian, RejectsNonzeroMean) {
    SpectralScalar f = random_scalar(kGrid, 41);
    f.mode(0, 0) = Complex(1.0, 0.0);
    EXPECT_THROW(inv_laplacian(f), std::invalid_argument);
}

TEST(Leray, AnnihilatesGradients) {
    SpectralVector gf = gradient(random_scalar(kGrid, 51));
    EXPECT_LT(l2_norm(leray_project(gf)), 1e-12 * l2_norm(gf));
}

TEST(Leray, FixesDivergenceFreeFields) {
    SpectralVector u = random_solenoidal(kGrid, 52);
    EXPECT_LT(rel_err(leray_project(u), u), 1e-13);
}

TEST(Leray, OrthogonalityIdentity) {
    // <Pu - u, Pu> = 0
    SpectralVector u = random_solenoidal(kGrid, 53) + gradient(random_scalar(kGrid, 54));
    SpectralVector pu = leray_project(u);
    const double ip = inner(pu - u, pu);
    EXPECT_LT(std::abs(ip), 1e-12 * l2_norm(u) * l2_norm(pu));
}

TEST(Leray, Idempotent) {
    SpectralVector u = random_solenoidal(kGrid, 55) + gradient(random_scalar(kGrid, 56));
    SpectralVector once = leray_project(u);
    SpectralVector twice = leray_project(once);
    EXPECT_LT(rel_err(twice, once), 1e-13);
}

TEST(Norms, SineL2IsHalfCellArea) {
    for (double L : {kTwoPi, 3.0}) {
        const Grid g(L, 32);
        const double n2 = l2_norm(make_sin(g, 1, 0));
        EXPECT_NEAR(n2 * n2, L * L / 2.0, 1e-12 * L * L);
    }
}

TEST(Norms, SineNegativeOneNorm) {
    for (double L : {kTwoPi, 3.0}) {
        const Grid g(L, 32);
        const double kap = kTwoPi / L;
        const double nm = sobolev_norm(make_sin(g, 1, 0), -1.0);
        EXPECT_NEAR(nm * nm, (L * L / 2.0) / (kap * kap), 1e-12 * L * L);
    }
}

TEST(Norms, SineL4ClosedForm) {
    // ||c sin(2pi x/L)||_L4 = |c| (3 L^2/8)^{1/4}
    for (double L : {kTwoPi, 3.0}) {
        const Grid g(L, 32);
        const double c = 2.75;
        const double got = l4_norm(make_sin(g, 1, 0, c));
        const double want = c * std::pow(3.0 * L * L / 8.0, 0.25);
        EXPECT_NEAR(got, want, 1e-12 * want);
    }
}

TEST(Norms, NegativeOrderRejectsNonzeroMean) {
    SpectralScalar f = random_scalar(kGrid, 61);
    f.mode(0, 0) = Complex(0.5, 0.0);
    EXPECT_THROW(sobolev_norm(f, -1.0), std::invalid_argument);
}

TEST(Norms, MonotoneAcrossScale) {
    // For mean-zero f with energy at |kappa| >= 2pi/L:
    //   ||f||_{-1} <= (L/2pi) ||f||_{L2} <= (L/2pi)^2 ||f||_1
    for (uint64_t seed : {71u, 72u, 73u, 74u}) {
        SpectralScalar f = random_scalar(kGrid, seed);
        const double r = kGrid.L / kTwoPi;
        EXPECT_LE(sobolev_norm(f, -1.0), r * l2_norm(f) * (1 + 1e-13));
        EXPECT_LE(l2_norm(f), r * sobolev_norm(f, 1.0) * (1 + 1e-13));
    }
}

TEST(Transforms, SpectralPhysicalRoundtrip) {
    SpectralScalar f = random_scalar(kGrid, 81);
    const auto phys = to_physical(f);
    SpectralScalar back = from_physical(phys, kGrid);
    EXPECT_LT(rel_err(back, f), 1e-12);

    // and the padded variant
    const int np = kGrid.padded();
    SpectralScalar back2 = from_physical(to_physical(f, np), kGrid, np);
    EXPECT_LT(rel_err(back2, f), 1e-12);
}

TEST(Transforms, PhysicalSpectralPhysicalRoundtrip) {
    // Samples of an admissible (mean-free, Nyquist-free) field reproduce.
    SpectralScalar f = random_scalar(kGrid, 82);
    auto phys = to_physical(f);
    SpectralScalar fitted = from_physical(phys, kGrid);
    auto phys2 = to_physical(fitted);
    double worst = 0.0, scale = 0.0;
    for (size_t i = 0; i < phys.size(); ++i) {
        worst = std::max(worst, std::abs(phys[i] - phys2[i]));
        scale = std::max(scale, std::abs(phys[i]));
    }
    EXPECT_LT(worst, 1e-12 * scale);
}

TEST(Fields, ProjectRealPinsInvariants) {
    SpectralScalar f(kGrid);
    // deliberately break every invariant
    f.mode(0, 0) = Complex(3.0, 1.0);
    f.mode(1, 1) = Complex(1.0, 2.0);
    f.mode(-1, -1) = Complex(5.0, 5.0);
    f.mode(-16, 3) = Complex(1.0, 1.0);
    f.project_real();
    EXPECT_EQ(f.mode(0, 0), Complex(0.0, 0.0));
    EXPECT_EQ(f.mode(-16, 3), Complex(0.0, 0.0));
    EXPECT_LT(f.hermitian_defect(), 1e-15);
}

TEST(Fields, GridMismatchThrows) {
    SpectralScalar a(kGrid);
    SpectralScalar b(Grid(kTwoPi, 16));
    EXPECT_THROW(a += b, std::invalid_argument);
}

} // namespace
