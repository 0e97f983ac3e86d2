#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <thread>

#include "spns/noise.hpp"
#include "test_util.hpp"

using namespace spns;
using namespace spns::testing;

namespace {

const Grid kGrid(kTwoPi, 32);

// L2 inner product of two vector fields by padded physical quadrature;
// independent of the spectral inner product used elsewhere.
double quadrature_inner(const SpectralVector& a, const SpectralVector& b) {
    const int np = a.grid().padded();
    const auto ax = to_physical(a.x(), np), ay = to_physical(a.y(), np);
    const auto bx = to_physical(b.x(), np), by = to_physical(b.y(), np);
    double acc = 0.0;
    for (size_t i = 0; i < ax.size(); ++i) acc += ax[i] * bx[i] + ay[i] * by[i];
    return acc * (a.grid().L / np) * (a.grid().L / np);
}

TEST(NoiseModel, HandComputedTraceForJ1Gamma3) {
    // Representatives (0,1),(1,-1),(1,0),(1,1); |kappa|^2 = 1,2,1,2.
    // trace = 2*[2*(1+1)^-3 + 2*(1+2)^-3] = 1/2 + 4/27.
    NoiseModel model(kGrid, 1, 3.0);
    EXPECT_EQ(model.num_modes(), 4u);
    const double want = 0.5 + 4.0 / 27.0;
    EXPECT_NEAR(model.trace(), want, 1e-15);
}

TEST(NoiseModel, RejectsInvalidParameters) {
    EXPECT_THROW(NoiseModel(kGrid, 1, 2.0), std::invalid_argument);
    EXPECT_THROW(NoiseModel(kGrid, 1, 1.5), std::invalid_argument);
    EXPECT_THROW(NoiseModel(kGrid, 0, 3.0), std::invalid_argument);
    EXPECT_THROW(NoiseModel(kGrid, 16, 3.0), std::invalid_argument);
}

TEST(NoiseModel, BasisFieldsAreSolenoidal) {
    NoiseModel model(kGrid, 4, 3.0);
    for (size_t m = 0; m < model.num_modes(); ++m) {
        for (int ch : {0, 1}) {
            SpectralVector e = model.basis_field(m, ch);
            EXPECT_LT(l2_norm(divergence(e)), 1e-12) << "mode " << m << " ch " << ch;
        }
    }
}

TEST(NoiseModel, GramMatrixIsIdentity) {
    NoiseModel model(kGrid, 2, 3.0);
    std::vector<SpectralVector> basis;
    for (size_t m = 0; m < model.num_modes(); ++m)
        for (int ch : {0, 1}) basis.push_back(model.basis_field(m, ch));
    for (size_t i = 0; i < basis.size(); ++i) {
        for (size_t j = i; j < basis.size(); ++j) {
            const double g = quadrature_inner(basis[i], basis[j]);
            EXPECT_NEAR(g, i == j ? 1.0 : 0.0, 1e-12) << "(" << i << "," << j << ")";
        }
    }
}

TEST(Increments, DegenerateTimeGivesZeroes) {
    NoiseModel model(kGrid, 2, 3.0);
    WienerIncrements incs = sample_increments(model, 4, 0.0, 1, 0);
    for (const auto& chan : incs.raw())
        for (double v : chan) EXPECT_EQ(v, 0.0);
}

TEST(Increments, SingleModeVarianceWithinChiSquareBand) {
    NoiseModel model(kGrid, 1, 3.0);
    const int n = 10000;
    const double T = 10.0;
    const double k_fine = T / n;
    WienerIncrements incs = sample_increments(model, n, T, 20250808, 0);
    const double q = model.modes()[0].q;
    double acc = 0.0;
    for (int s = 0; s < n; ++s) {
        const double x = incs.entry(0, 0, s);
        acc += x * x;
    }
    const double ratio = acc / n / (k_fine * q);
    EXPECT_GT(ratio, 0.95);
    EXPECT_LT(ratio, 1.05);
}

TEST(Increments, FieldEnergyMatchesTraceScaling) {
    // E ||Delta W||^2 = k * trace(Q) for the truncated expansion.
    NoiseModel model(kGrid, 8, 3.0);
    const int n = 1000;
    const double T = 1.0;
    WienerIncrements incs = sample_increments(model, n, T, 99, 3);
    double acc = 0.0;
    for (int ell = 1; ell <= n; ++ell) {
        const double nrm = l2_norm(increment_field(model, incs, ell));
        acc += nrm * nrm;
    }
    const double ratio = acc / n / ((T / n) * model.trace());
    EXPECT_GT(ratio, 0.9);
    EXPECT_LT(ratio, 1.1);
}

TEST(Coarsen, FactorOneIsIdentity) {
    NoiseModel model(kGrid, 2, 3.0);
    WienerIncrements incs = sample_increments(model, 8, 1.0, 5, 0);
    WienerIncrements same = coarsen(incs, 1);
    EXPECT_EQ(same.raw(), incs.raw());
}

TEST(Coarsen, FullFactorGivesTotalSum) {
    NoiseModel model(kGrid, 1, 3.0);
    WienerIncrements incs = sample_increments(model, 16, 1.0, 6, 0);
    WienerIncrements total = coarsen(incs, 16);
    EXPECT_EQ(total.steps(), 1);
    for (size_t c = 0; c < incs.channels(); ++c) {
        const double want = detail::canonical_sum(incs.raw()[c], 0, 16);
        EXPECT_EQ(total.raw()[c][0], want);
    }
}

TEST(Coarsen, NestedHalvingsMatchDirectQuartering) {
    NoiseModel model(kGrid, 2, 3.0);
    WienerIncrements incs = sample_increments(model, 64, 1.0, 7, 2);
    WienerIncrements nested = coarsen(coarsen(incs, 2), 2);
    WienerIncrements direct = coarsen(incs, 4);
    EXPECT_EQ(nested.raw(), direct.raw());
}

TEST(Coarsen, TelescopesBitExactlyAcrossLevels) {
    NoiseModel model(kGrid, 2, 3.0);
    WienerIncrements fine = sample_increments(model, 1024, 0.5, 8, 1);
    for (int factor : {2, 8, 64, 1024}) {
        WienerIncrements coarse = coarsen(fine, factor);
        for (size_t c = 0; c < fine.channels(); ++c) {
            const double total_fine = detail::canonical_sum(fine.raw()[c], 0, 1024);
            const double total_coarse =
                detail::canonical_sum(coarse.raw()[c], 0, coarse.raw()[c].size());
            EXPECT_EQ(total_coarse, total_fine) << "factor " << factor;
        }
    }
}

TEST(Coarsen, RejectsNonDivisorFactor) {
    NoiseModel model(kGrid, 1, 3.0);
    WienerIncrements incs = sample_increments(model, 16, 1.0, 9, 0);
    EXPECT_THROW(coarsen(incs, 3), std::invalid_argument);
}

TEST(IncrementField, ZeroDrawsGiveZeroField) {
    NoiseModel model(kGrid, 2, 3.0);
    WienerIncrements incs(model.num_modes(), 4, 1.0, 0, 0);
    EXPECT_EQ(l2_norm(increment_field(model, incs, 1)), 0.0);
}

TEST(IncrementField, SingleDrawScalesBasisField) {
    NoiseModel model(kGrid, 2, 3.0);
    const size_t mode = 3;
    const double q = model.modes()[mode].q;
    const double xi = -1.7;  // underlying standard draw
    WienerIncrements incs(model.num_modes(), 1, 1.0, 0, 0);
    incs.entry(mode, 1, 0) = xi * std::sqrt(q);
    SpectralVector w = increment_field(model, incs, 1);
    SpectralVector want = model.basis_field(mode, 1);
    want *= xi * std::sqrt(q);
    EXPECT_LT(rel_err(w, want), 1e-14);
    EXPECT_NEAR(l2_norm(w), std::abs(xi) * std::sqrt(q), 1e-14);
}

TEST(IncrementField, RandomDrawsAreSolenoidal) {
    NoiseModel model(kGrid, 8, 3.0);
    WienerIncrements incs = sample_increments(model, 4, 1.0, 10, 0);
    for (int ell = 1; ell <= 4; ++ell) {
        SpectralVector w = increment_field(model, incs, ell);
        EXPECT_LT(l2_norm(divergence(w)), 1e-12 * h1_norm(w));
    }
}

TEST(IncrementField, OutOfRangeIndexThrows) {
    NoiseModel model(kGrid, 1, 3.0);
    WienerIncrements incs = sample_increments(model, 4, 1.0, 11, 0);
    EXPECT_THROW(increment_field(model, incs, 0), std::out_of_range);
    EXPECT_THROW(increment_field(model, incs, 5), std::out_of_range);
}

TEST(Reproducibility, SameSeedSamePathAcrossThreads) {
    NoiseModel model(kGrid, 4, 3.0);
    WienerIncrements a = sample_increments(model, 64, 1.0, 42, 7);
    WienerIncrements b;
    std::thread worker([&] { b = sample_increments(model, 64, 1.0, 42, 7); });
    worker.join();
    EXPECT_EQ(a.raw(), b.raw());
}

TEST(Reproducibility, DistinctPathsDecorrelated) {
    NoiseModel model(kGrid, 1, 3.0);
    const int n = 10000;
    WienerIncrements a = sample_increments(model, n, 1.0, 42, 0);
    WienerIncrements b = sample_increments(model, n, 1.0, 42, 1);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (int s = 0; s < n; ++s) {
        const double x = a.entry(0, 0, s), y = b.entry(0, 0, s);
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
    }
    const double corr = sxy / std::sqrt(sxx * syy);
    EXPECT_LT(std::abs(corr), 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Persistence, LadderRoundtripsThroughContainer) {
    NoiseModel model(kGrid, 3, 3.0);
    WienerIncrements incs = sample_increments(model, 32, 0.5, 77, 5);
    const std::string path =
        (std::filesystem::temp_directory_path() / "spns_ladder.fld").string();
    save_increments(model, incs, path);
    LoadedIncrements back = load_increments(path);
    EXPECT_EQ(back.model.J(), 3);
    EXPECT_EQ(back.model.gamma(), 3.0);
    EXPECT_EQ(back.increments.raw(), incs.raw());
    EXPECT_EQ(back.increments.base_seed(), 77u);
    EXPECT_EQ(back.increments.path_index(), 5u);
    std::remove(path.c_str());
}

} // namespace
