#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "spns/field.hpp"

namespace spns {

// Field snapshot container. Little-endian binary: 8-byte magic, u8 kind,
// kind-specific header, then payload. Field payloads are row-major complex
// coefficients as f64 pairs.
namespace snapshot {

inline constexpr char kMagic[8] = {'S', 'P', 'N', 'S', 'F', 'L', 'D', '1'};

enum class Kind : uint8_t { Scalar = 0, Vector = 1, Increments = 2, Checkpoint = 3 };

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("snapshot: cannot open for writing: " + path);
        out_.write(kMagic, sizeof(kMagic));
    }

    void u8(uint8_t v) { raw(&v, 1); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }

    void complex_array(const std::vector<Complex>& c) {
        for (const auto& z : c) {
            f64(z.real());
            f64(z.imag());
        }
    }

    void scalar_payload(const SpectralScalar& f) { complex_array(f.data()); }
    void vector_payload(const SpectralVector& u) {
        scalar_payload(u.x());
        scalar_payload(u.y());
    }

    void finish() {
        out_.flush();
        if (!out_) throw std::runtime_error("snapshot: write failure");
    }

private:
    void raw(const void* p, size_t n) { out_.write(static_cast<const char*>(p), n); }
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("snapshot: cannot open for reading: " + path);
        char magic[8];
        raw(magic, sizeof(magic));
        if (std::memcmp(magic, kMagic, sizeof(magic)) != 0)
            throw std::runtime_error("snapshot: bad magic in " + path);
    }

    uint8_t u8() { uint8_t v; raw(&v, 1); return v; }
    uint32_t u32() { uint32_t v; raw(&v, 4); return v; }
    uint64_t u64() { uint64_t v; raw(&v, 8); return v; }
    double f64() { double v; raw(&v, 8); return v; }

    void complex_array(std::vector<Complex>& c) {
        for (auto& z : c) {
            const double re = f64();
            const double im = f64();
            z = Complex(re, im);
        }
    }

    SpectralScalar scalar_payload(const Grid& g) {
        SpectralScalar f(g);
        complex_array(f.data());
        return f;
    }
    SpectralVector vector_payload(const Grid& g) {
        SpectralVector u(g);
        complex_array(u.x().data());
        complex_array(u.y().data());
        return u;
    }

private:
    void raw(void* p, size_t n) {
        in_.read(static_cast<char*>(p), n);
        if (!in_) throw std::runtime_error("snapshot: truncated container");
    }
    std::ifstream in_;
};

} // namespace snapshot

// Field files carry the header {L: f64, N: u32, kind: u8} after the magic,
// then row-major complex coefficients as little-endian f64 pairs.
inline void save_field(const SpectralScalar& f, const std::string& path) {
    snapshot::Writer w(path);
    w.f64(f.grid().L);
    w.u32(static_cast<uint32_t>(f.grid().N));
    w.u8(static_cast<uint8_t>(snapshot::Kind::Scalar));
    w.scalar_payload(f);
    w.finish();
}

inline void save_field(const SpectralVector& u, const std::string& path) {
    snapshot::Writer w(path);
    w.f64(u.grid().L);
    w.u32(static_cast<uint32_t>(u.grid().N));
    w.u8(static_cast<uint8_t>(snapshot::Kind::Vector));
    w.vector_payload(u);
    w.finish();
}

inline SpectralScalar load_scalar(const std::string& path) {
    snapshot::Reader r(path);
    const double L = r.f64();
    const int N = static_cast<int>(r.u32());
    if (r.u8() != static_cast<uint8_t>(snapshot::Kind::Scalar))
        throw std::runtime_error("snapshot: not a scalar field: " + path);
    return r.scalar_payload(Grid(L, N));
}

inline SpectralVector load_vector(const std::string& path) {
    snapshot::Reader r(path);
    const double L = r.f64();
    const int N = static_cast<int>(r.u32());
    if (r.u8() != static_cast<uint8_t>(snapshot::Kind::Vector))
        throw std::runtime_error("snapshot: not a vector field: " + path);
    return r.vector_payload(Grid(L, N));
}

// Plain-text dump, one "n1 n2 re im" line per coefficient, for debugging.
inline void dump_text(const SpectralScalar& f, std::ostream& os) {
    const Grid& g = f.grid();
    char line[96];
    for (int i1 = 0; i1 < g.N; ++i1) {
        for (int i2 = 0; i2 < g.N; ++i2) {
            const Complex c = f.at(i1, i2);
            std::snprintf(line, sizeof(line), "%d %d %.17g %.17g\n", g.mode(i1), g.mode(i2),
                          c.real(), c.imag());
            os << line;
        }
    }
}

inline void dump_text(const SpectralVector& u, std::ostream& os) {
    dump_text(u.x(), os);
    dump_text(u.y(), os);
}

} // namespace spns
