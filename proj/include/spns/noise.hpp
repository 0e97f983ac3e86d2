#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spns/io.hpp"
#include "spns/operators.hpp"
#include "spns/rng.hpp"

namespace spns {

// Solenoidal Q-Wiener noise truncated to |n|_inf <= J. Each retained
// half-lattice representative n carries two orthonormal basis fields
//   sqrt(2)/L * (n_perp/|n|) cos(kappa_n.x)  and the sine companion,
// with shared variance q_n = (1+|kappa_n|^2)^{-gamma}.
struct NoiseMode {
    int n1, n2;
    double q;       // per-mode variance
    double d1, d2;  // unit direction n_perp/|n|
};

class NoiseModel {
public:
    NoiseModel() = default;

    NoiseModel(const Grid& grid, int J, double gamma) : grid_(grid), J_(J), gamma_(gamma) {
        if (J < 1) throw std::invalid_argument("noise: J must be >= 1");
        if (gamma <= 2.0)
            throw std::invalid_argument("noise: gamma must exceed 2 (trace-class covariance)");
        if (2 * J + 1 > grid.N) throw std::invalid_argument("noise: 2J+1 must not exceed N");
        // Half-lattice representatives: n1 > 0, or (n1 == 0 and n2 > 0).
        for (int n1 = 0; n1 <= J; ++n1) {
            for (int n2 = (n1 == 0 ? 1 : -J); n2 <= J; ++n2) {
                const double k1 = grid.kappa(n1);
                const double k2 = grid.kappa(n2);
                const double k2sum = k1 * k1 + k2 * k2;
                const double knorm = std::sqrt(k2sum);
                NoiseMode m;
                m.n1 = n1;
                m.n2 = n2;
                m.q = std::pow(1.0 + k2sum, -gamma);
                m.d1 = -k2 / knorm;
                m.d2 = k1 / knorm;
                modes_.push_back(m);
                trace_ += 2.0 * m.q;
            }
        }
    }

    const Grid& grid() const { return grid_; }
    int J() const { return J_; }
    double gamma() const { return gamma_; }
    const std::vector<NoiseMode>& modes() const { return modes_; }
    size_t num_modes() const { return modes_.size(); }
    double trace() const { return trace_; }

    // Basis field for (mode, channel): channel 0 = cosine, 1 = sine.
    SpectralVector basis_field(size_t mode, int channel) const {
        const NoiseMode& m = modes_[mode];
        SpectralVector e(grid_);
        const double a = std::sqrt(2.0) / (2.0 * grid_.L);
        const Complex cpos = channel == 0 ? Complex(a, 0.0) : Complex(0.0, -a);
        const Complex cneg = std::conj(cpos);
        e.x().mode(m.n1, m.n2) = m.d1 * cpos;
        e.y().mode(m.n1, m.n2) = m.d2 * cpos;
        e.x().mode(-m.n1, -m.n2) = m.d1 * cneg;
        e.y().mode(-m.n1, -m.n2) = m.d2 * cneg;
        return e;
    }

private:
    Grid grid_;
    int J_ = 0;
    double gamma_ = 0.0;
    std::vector<NoiseMode> modes_;
    double trace_ = 0.0;
};

// Ladder of Brownian increments at the fine resolution M_fine over [0,T].
// Entry (mode, channel, step) is the increment of sqrt(q_n) beta(t) over the
// step, i.e. N(0, k_fine * q_n). Coarse levels are exact partial sums.
class WienerIncrements {
public:
    WienerIncrements() = default;

    WienerIncrements(size_t num_modes, int M_fine, double T, uint64_t base_seed,
                     uint64_t path_index)
        : M_(M_fine), T_(T), base_seed_(base_seed), path_index_(path_index),
          data_(num_modes * 2, std::vector<double>(static_cast<size_t>(M_fine), 0.0)) {}

    int steps() const { return M_; }
    double T() const { return T_; }
    double dt() const { return T_ / M_; }
    uint64_t base_seed() const { return base_seed_; }
    uint64_t path_index() const { return path_index_; }
    size_t channels() const { return data_.size(); }

    double& entry(size_t mode, int channel, int step) { return data_[2 * mode + channel][step]; }
    double entry(size_t mode, int channel, int step) const { return data_[2 * mode + channel][step]; }

    std::vector<std::vector<double>>& raw() { return data_; }
    const std::vector<std::vector<double>>& raw() const { return data_; }

private:
    int M_ = 0;
    double T_ = 0.0;
    uint64_t base_seed_ = 0;
    uint64_t path_index_ = 0;
    std::vector<std::vector<double>> data_;
};

// Gaussian increments for one path at the fine level. Substream per
// (mode, channel) so generation order never affects the values.
inline WienerIncrements sample_increments(const NoiseModel& model, int M_fine, double T,
                                          uint64_t base_seed, uint64_t path_index) {
    if (M_fine < 1) throw std::invalid_argument("noise: M_fine must be >= 1");
    WienerIncrements incs(model.num_modes(), M_fine, T, base_seed, path_index);
    const double k_fine = T / M_fine;
    const uint64_t stream = path_stream_key(base_seed, path_index);
    for (size_t m = 0; m < model.num_modes(); ++m) {
        const double sd_q = std::sqrt(k_fine * model.modes()[m].q);
        for (int ch = 0; ch < 2; ++ch) {
            CounterRng rng(substream_key(stream, 2 * m + ch));
            for (int s = 0; s < M_fine; ++s) incs.entry(m, ch, s) = sd_q * rng.gaussian(s);
        }
    }
    return incs;
}

namespace detail {
// Canonical pairwise sum of data[first, first+count): split at the largest
// power of two strictly below count. Nested power-of-two coarsenings then
// reuse identical expression trees, which is what makes coarsen(coarsen(w,2),2)
// bit-equal to coarsen(w,4).
inline double canonical_sum(const std::vector<double>& data, size_t first, size_t count) {
    if (count == 1) return data[first];
    size_t half = 1;
    while (half * 2 < count) half *= 2;
    return canonical_sum(data, first, half) + canonical_sum(data, first + half, count - half);
}
} // namespace detail

// Sums blocks of `factor` fine increments into one coarse ladder.
inline WienerIncrements coarsen(const WienerIncrements& incs, int factor) {
    if (factor < 1 || incs.steps() % factor != 0)
        throw std::invalid_argument("noise: coarsening factor must divide M_fine");
    if (factor == 1) return incs;
    const int M_coarse = incs.steps() / factor;
    WienerIncrements out(incs.channels() / 2, M_coarse, incs.T(), incs.base_seed(),
                         incs.path_index());
    for (size_t c = 0; c < incs.channels(); ++c) {
        const auto& fine = incs.raw()[c];
        auto& coarse = out.raw()[c];
        for (int s = 0; s < M_coarse; ++s)
            coarse[s] = detail::canonical_sum(fine, static_cast<size_t>(s) * factor, factor);
    }
    return out;
}

// Assembles the field of increment ell (1-based) of a ladder.
inline SpectralVector increment_field(const NoiseModel& model, const WienerIncrements& incs,
                                      int ell) {
    if (ell < 1 || ell > incs.steps())
        throw std::out_of_range("noise: increment index out of range");
    if (incs.channels() != 2 * model.num_modes())
        throw std::invalid_argument("noise: ladder does not match model");
    SpectralVector w(model.grid());
    const double a = std::sqrt(2.0) / (2.0 * model.grid().L);
    for (size_t m = 0; m < model.num_modes(); ++m) {
        const NoiseMode& mode = model.modes()[m];
        const double xc = incs.entry(m, 0, ell - 1);
        const double xs = incs.entry(m, 1, ell - 1);
        // cos channel contributes a*(xc) at +-n; sin channel -i*a*xs at +n.
        const Complex cpos = Complex(a * xc, -a * xs);
        w.x().mode(mode.n1, mode.n2) += mode.d1 * cpos;
        w.y().mode(mode.n1, mode.n2) += mode.d2 * cpos;
        w.x().mode(-mode.n1, -mode.n2) += mode.d1 * std::conj(cpos);
        w.y().mode(-mode.n1, -mode.n2) += mode.d2 * std::conj(cpos);
    }
    return w;
}

// Persists a ladder in the snapshot container with enough metadata to
// regenerate or resume the owning experiment.
inline void save_increments(const NoiseModel& model, const WienerIncrements& incs,
                            const std::string& path) {
    snapshot::Writer w(path);
    w.f64(model.grid().L);
    w.u32(static_cast<uint32_t>(model.grid().N));
    w.u8(static_cast<uint8_t>(snapshot::Kind::Increments));
    w.u64(incs.base_seed());
    w.u64(incs.path_index());
    w.u32(static_cast<uint32_t>(incs.steps()));
    w.u32(static_cast<uint32_t>(model.J()));
    w.f64(model.gamma());
    w.f64(incs.T());
    for (const auto& chan : incs.raw())
        for (double v : chan) w.f64(v);
    w.finish();
}

struct LoadedIncrements {
    NoiseModel model;
    WienerIncrements increments;
};

inline LoadedIncrements load_increments(const std::string& path) {
    snapshot::Reader r(path);
    const double L = r.f64();
    const int N = static_cast<int>(r.u32());
    if (r.u8() != static_cast<uint8_t>(snapshot::Kind::Increments))
        throw std::runtime_error("snapshot: not an increment ladder: " + path);
    const uint64_t base_seed = r.u64();
    const uint64_t path_index = r.u64();
    const int M = static_cast<int>(r.u32());
    const int J = static_cast<int>(r.u32());
    const double gamma = r.f64();
    const double T = r.f64();
    LoadedIncrements out{NoiseModel(Grid(L, N), J, gamma),
                         WienerIncrements(0, M, T, base_seed, path_index)};
    out.increments =
        WienerIncrements(out.model.num_modes(), M, T, base_seed, path_index);
    for (auto& chan : out.increments.raw())
        for (double& v : chan) v = r.f64();
    return out;
}

} // namespace spns
