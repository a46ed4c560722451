#include "skyrmion/hilbert.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <omp.h>

#if defined(__BMI2__)
#include <immintrin.h>
#endif

#include "skyrmion/errors.hpp"
#include "skyrmion/parallel.hpp"

namespace skyrmion {

namespace parallel {

void set_threads(int n) {
    if (n > 0) omp_set_num_threads(n);
}

int threads() { return omp_get_max_threads(); }

}  // namespace parallel

namespace {

void require_same_dim(const StateVector& a, const StateVector& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument(fmt::format("{}: dimension mismatch ({} vs {})", what, a.dim(), b.dim()));
    }
}

std::size_t dim_of(std::size_t n_sites) {
    if (n_sites == 0 || n_sites > 30) throw std::invalid_argument(fmt::format("unsupported site count {}", n_sites));
    return std::size_t{1} << n_sites;
}

}  // namespace

StateVector::StateVector(std::size_t n_sites) : n_sites_(n_sites), amps_(dim_of(n_sites)) {}

StateVector::StateVector(std::size_t n_sites, std::vector<cplx> amplitudes)
    : n_sites_(n_sites), amps_(std::move(amplitudes)) {
    if (amps_.size() != dim_of(n_sites)) {
        throw std::invalid_argument(fmt::format("expected {} amplitudes, got {}", dim_of(n_sites), amps_.size()));
    }
}

StateVector StateVector::basis_state(std::size_t n_sites, std::uint64_t config) {
    StateVector s(n_sites);
    if (config >= s.dim()) throw std::out_of_range("basis configuration out of range");
    s.amps_[config] = 1.0;
    return s;
}

StateVector StateVector::random(std::size_t n_sites, std::uint64_t seed) {
    StateVector s(n_sites);
    std::mt19937_64 gen(seed);
    // Raw 53-bit mantissas keep the sequence identical across standard libraries.
    auto uniform = [&gen]() { return static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5; };
    for (auto& a : s.amps_) {
        const double re = uniform();
        const double im = uniform();
        a = {re, im};
    }
    s.normalize();
    return s;
}

double StateVector::norm() const {
    const double sq = parallel::chunked_sum<double>(amps_.size(), [this](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t k = b; k < e; ++k) acc += std::norm(amps_[k]);
        return acc;
    });
    return std::sqrt(sq);
}

double StateVector::normalize() {
    const double n = norm();
    if (n == 0.0) throw PhysicsError("cannot normalize the zero vector");
    *this *= cplx{1.0 / n, 0.0};
    return n;
}

StateVector& StateVector::operator*=(cplx s) {
    parallel::for_chunks(amps_.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) amps_[k] *= s;
    });
    return *this;
}

StateVector& StateVector::operator+=(const StateVector& o) {
    axpy(1.0, o);
    return *this;
}

StateVector& StateVector::operator-=(const StateVector& o) {
    axpy(-1.0, o);
    return *this;
}

void StateVector::axpy(cplx s, const StateVector& x) {
    require_same_dim(*this, x, "axpy");
    parallel::for_chunks(amps_.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) amps_[k] += s * x.amps_[k];
    });
}

cplx inner(const StateVector& lhs, const StateVector& rhs) {
    require_same_dim(lhs, rhs, "inner");
    const auto l = lhs.amplitudes();
    const auto r = rhs.amplitudes();
    return parallel::chunked_sum<cplx>(l.size(), [&](std::size_t b, std::size_t e) {
        cplx acc{};
        for (std::size_t k = b; k < e; ++k) acc += std::conj(l[k]) * r[k];
        return acc;
    });
}

double expectation(const OperatorApply& op, const StateVector& psi) {
    StateVector tmp;
    op(psi, tmp);
    const cplx v = inner(psi, tmp);
    if (std::abs(v.imag()) > 1e-10) {
        throw PhysicsError(fmt::format("expectation value has imaginary part {:.3e}; operator is not Hermitian", v.imag()));
    }
    return v.real();
}

Hamiltonian::Hamiltonian(std::shared_ptr<const Cluster> cluster, Couplings couplings)
    : cluster_(std::move(cluster)), couplings_(couplings) {
    if (!cluster_) throw std::invalid_argument("Hamiltonian needs a cluster");
    if (!(couplings_.D >= 0.0) || !std::isfinite(couplings_.D) || !std::isfinite(couplings_.J) ||
        !std::isfinite(couplings_.B)) {
        throw std::invalid_argument(
            fmt::format("couplings must be finite with D >= 0 (J={}, D={}, B={})", couplings_.J, couplings_.D, couplings_.B));
    }
    const std::size_t n = cluster_->n_sites();
    const std::size_t dim = dim_of(n);
    const auto& bonds = cluster_->bonds();

    diagonal_.assign(dim, 0.0);
    parallel::for_chunks(dim, [&](std::size_t b, std::size_t e) {
        for (std::size_t c = b; c < e; ++c) {
            double d = 0.0;
            for (const auto& bond : bonds) {
                const bool same = ((c >> bond.i) & 1U) == ((c >> bond.j) & 1U);
                d += couplings_.J * (same ? 0.25 : -0.25);
            }
            d += couplings_.B * (static_cast<double>(std::popcount(c)) - 0.5 * static_cast<double>(n));
            diagonal_[c] = d;
        }
    });

    std::map<std::pair<std::size_t, std::size_t>, int> multiplicity;
    for (const auto& bond : bonds) {
        ++multiplicity[{std::min(bond.i, bond.j), std::max(bond.i, bond.j)}];
    }
    for (const auto& [pair, count] : multiplicity) {
        pair_flips_.push_back(PairFlip{(std::uint64_t{1} << pair.first) | (std::uint64_t{1} << pair.second),
                                       static_cast<unsigned>(pair.first), static_cast<unsigned>(pair.second),
                                       0.5 * couplings_.J * count});
    }

    site_flips_.resize(n);
    for (std::size_t site = 0; site < n; ++site) {
        std::vector<std::pair<std::size_t, cplx>> slots;
        for (const auto& bond : bonds) {
            const cplx d{couplings_.D * bond.dmi.x, couplings_.D * bond.dmi.y};
            if (bond.i == site) slots.emplace_back(bond.j, d);
            if (bond.j == site) slots.emplace_back(bond.i, -d);
        }
        if (slots.size() != 6) throw std::logic_error("triangular cluster site without six bond slots");
        SiteFlip& sf = site_flips_[site];
        for (const auto& [j, e] : slots) sf.neighbour_mask |= std::uint64_t{1} << j;
        // Table index: neighbour bits packed in ascending site order (pext order).
        const int width = std::popcount(sf.neighbour_mask);
        sf.lowering.assign(std::size_t{1} << width, cplx{});
        for (std::uint64_t pattern = 0; pattern < sf.lowering.size(); ++pattern) {
            cplx f{};
            for (const auto& [j, e] : slots) {
                const int rank = std::popcount(sf.neighbour_mask & ((std::uint64_t{1} << j) - 1));
                const double sz = ((pattern >> rank) & 1U) ? 0.5 : -0.5;
                f += sz * e;
            }
            sf.lowering[pattern] = cplx{0.0, 0.5} * f;
        }
    }
}

namespace {

#if defined(__BMI2__)
inline std::uint64_t extract_bits(std::uint64_t x, std::uint64_t mask) { return _pext_u64(x, mask); }
#else
inline std::uint64_t extract_bits(std::uint64_t x, std::uint64_t mask) {
    std::uint64_t r = 0;
    for (std::uint64_t k = 1; mask != 0; k <<= 1) {
        const std::uint64_t low = mask & (~mask + 1);
        if (x & low) r |= k;
        mask ^= low;
    }
    return r;
}
#endif

constexpr unsigned kTileBits = 10;

}  // namespace

void Hamiltonian::apply_kernel(std::span<const cplx> in, std::span<cplx> out, double shift, double scale) const {
    const std::size_t n = n_sites();
    const std::size_t dim = in.size();
    const std::size_t tile = std::min<std::size_t>(dim, std::size_t{1} << kTileBits);
    const std::size_t n_tiles = dim / tile;
    const double* diag = diagonal_.data();
    const double* src = reinterpret_cast<const double*>(in.data());
    double* dst = reinterpret_cast<double*>(out.data());

    // Each tile of outputs pulls from one contiguous (or in-tile) source range
    // per term, so every term streams sequentially through memory.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t t = 0; t < static_cast<std::ptrdiff_t>(n_tiles); ++t) {
        const std::size_t t0 = static_cast<std::size_t>(t) * tile;
        const std::size_t t1 = t0 + tile;
        double* acc = dst + 2 * t0;
        for (std::size_t c = t0; c < t1; ++c) {
            const double d = diag[c] - shift;
            acc[2 * (c - t0)] = d * src[2 * c];
            acc[2 * (c - t0) + 1] = d * src[2 * c + 1];
        }
        for (std::size_t site = 0; site < n; ++site) {
            const SiteFlip& sf = site_flips_[site];
            const double* table = reinterpret_cast<const double*>(sf.lowering.data());
            const std::uint64_t bit = std::uint64_t{1} << site;
            for (std::size_t c = t0; c < t1; ++c) {
                const std::uint64_t pattern = extract_bits(c, sf.neighbour_mask);
                const double fr = table[2 * pattern];
                const double fi = (c & bit) ? -table[2 * pattern + 1] : table[2 * pattern + 1];
                const double* x = src + 2 * (c ^ bit);
                double* a = acc + 2 * (c - t0);
                a[0] += fr * x[0] - fi * x[1];
                a[1] += fr * x[1] + fi * x[0];
            }
        }
        for (const PairFlip& pf : pair_flips_) {
            if (pf.i >= kTileBits && pf.j >= kTileBits) {
                // Both bits are constant over the tile.
                if (((t0 >> pf.i) ^ (t0 >> pf.j)) & 1U) {
                    const double* x = src + 2 * (t0 ^ pf.mask);
                    const double w = pf.amplitude;
                    for (std::size_t k = 0; k < 2 * tile; ++k) acc[k] += w * x[k];
                }
                continue;
            }
            for (std::size_t c = t0; c < t1; ++c) {
                const double w = pf.amplitude * static_cast<double>(((c >> pf.i) ^ (c >> pf.j)) & 1U);
                const double* x = src + 2 * (c ^ pf.mask);
                double* a = acc + 2 * (c - t0);
                a[0] += w * x[0];
                a[1] += w * x[1];
            }
        }
        if (scale != 1.0) {
            for (std::size_t k = 0; k < 2 * tile; ++k) acc[k] *= scale;
        }
    }
}

void Hamiltonian::apply(const StateVector& in, StateVector& out) const {
    apply_shifted(in, out, 0.0, 1.0);
}

StateVector Hamiltonian::apply(const StateVector& in) const {
    StateVector out(in.n_sites());
    apply(in, out);
    return out;
}

void Hamiltonian::apply_shifted(const StateVector& in, StateVector& out, double shift, double scale) const {
    if (in.n_sites() != n_sites()) throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
    if (&in == &out) throw std::invalid_argument("apply_hamiltonian: input and output must be distinct");
    if (out.dim() != in.dim()) out = StateVector(in.n_sites());
    apply_kernel(in.amplitudes(), out.amplitudes(), shift, scale);
}

void Hamiltonian::apply_shifted(std::span<const cplx> in, std::span<cplx> out, double shift, double scale) const {
    if (in.size() != dim() || out.size() != dim()) throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
    apply_kernel(in, out, shift, scale);
}

OperatorApply Hamiltonian::as_operator() const {
    return [this](const StateVector& in, StateVector& out) { apply(in, out); };
}

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'Q', 'S', 'P', 'N'};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const StateVector& psi) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error(fmt::format("cannot open checkpoint {} for writing", path.string()));
    const std::uint32_t version = kCheckpointVersion;
    const auto n = static_cast<std::uint32_t>(psi.n_sites());
    os.write(kMagic, 4);
    os.write(reinterpret_cast<const char*>(&version), sizeof version);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    // std::complex<double> is layout-compatible with double[2].
    os.write(reinterpret_cast<const char*>(psi.amplitudes().data()),
             static_cast<std::streamsize>(psi.dim() * sizeof(cplx)));
    if (!os) throw std::runtime_error(fmt::format("short write on checkpoint {}", path.string()));
}

StateVector read_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error(fmt::format("cannot open checkpoint {}", path.string()));
    char magic[4];
    std::uint32_t version = 0;
    std::uint32_t n = 0;
    is.read(magic, 4);
    is.read(reinterpret_cast<char*>(&version), sizeof version);
    is.read(reinterpret_cast<char*>(&n), sizeof n);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error(fmt::format("{} is not a QSPN checkpoint", path.string()));
    }
    if (version != kCheckpointVersion) {
        throw std::runtime_error(fmt::format("{}: unsupported checkpoint version {}", path.string(), version));
    }
    std::vector<cplx> amps(dim_of(n));
    is.read(reinterpret_cast<char*>(amps.data()), static_cast<std::streamsize>(amps.size() * sizeof(cplx)));
    if (!is) throw std::runtime_error(fmt::format("{}: truncated checkpoint", path.string()));
    if (is.peek() != std::char_traits<char>::eof()) {
        throw std::runtime_error(fmt::format("{}: trailing bytes after amplitudes", path.string()));
    }
    return StateVector(n, std::move(amps));
}

}  // namespace skyrmion
