#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "skyrmion/lattice.hpp"

namespace skyrmion {

using cplx = std::complex<double>;

/// Amplitudes over the 2^N computational z-basis. Bit i of the basis index
/// is 1 for spin up (S^z = +1/2) on site i, 0 for spin down.
///
/// The type does not enforce normalization: operator images such as H|psi>
/// are StateVectors too. Physical states are normalized by the producers.
class StateVector {
  public:
    StateVector() = default;
    explicit StateVector(std::size_t n_sites);
    StateVector(std::size_t n_sites, std::vector<cplx> amplitudes);

    static StateVector basis_state(std::size_t n_sites, std::uint64_t config);
    /// Deterministic pseudo-random normalized state (mt19937_64, raw bits).
    static StateVector random(std::size_t n_sites, std::uint64_t seed);

    std::size_t n_sites() const { return n_sites_; }
    std::size_t dim() const { return amps_.size(); }

    std::span<cplx> amplitudes() { return amps_; }
    std::span<const cplx> amplitudes() const { return amps_; }
    cplx& operator[](std::size_t k) { return amps_[k]; }
    const cplx& operator[](std::size_t k) const { return amps_[k]; }

    double norm() const;
    /// Scales to unit norm and returns the norm before scaling.
    double normalize();

    StateVector& operator*=(cplx s);
    StateVector& operator+=(const StateVector& o);
    StateVector& operator-=(const StateVector& o);
    /// this += s * x
    void axpy(cplx s, const StateVector& x);

    friend bool operator==(const StateVector&, const StateVector&) = default;

  private:
    std::size_t n_sites_ = 0;
    std::vector<cplx> amps_;
};

/// <lhs|rhs>, conjugating the first argument.
cplx inner(const StateVector& lhs, const StateVector& rhs);

/// Operator application: writes O|in> into out (out is resized as needed).
using OperatorApply = std::function<void(const StateVector& in, StateVector& out)>;

/// Re<psi|O|psi>; throws PhysicsError when |Im| > 1e-10 (non-Hermitian O).
double expectation(const OperatorApply& op, const StateVector& psi);

struct Couplings {
    double J = -0.5;  // exchange, units of D
    double D = 1.0;   // DMI magnitude, sets the energy unit
    double B = 0.5;   // Zeeman field
};

/// H = sum_bonds [ J S_i.S_j + D d_ij.(S_i x S_j) ] + B sum_i S^z_i, applied
/// without storing the matrix. Construction precomputes the diagonal and the
/// per-site single-flip tables generated by the in-plane DMI vectors.
class Hamiltonian {
  public:
    Hamiltonian(std::shared_ptr<const Cluster> cluster, Couplings couplings);

    const Cluster& cluster() const { return *cluster_; }
    std::shared_ptr<const Cluster> cluster_ptr() const { return cluster_; }
    const Couplings& couplings() const { return couplings_; }
    std::size_t n_sites() const { return cluster_->n_sites(); }
    std::size_t dim() const { return std::size_t{1} << n_sites(); }

    /// out = H in. Parallel over output amplitudes; each output is a pull
    /// from its connected inputs, so the result is thread-count independent.
    void apply(const StateVector& in, StateVector& out) const;
    StateVector apply(const StateVector& in) const;

    /// out = scale * (H - shift) in
    void apply_shifted(const StateVector& in, StateVector& out, double shift, double scale) const;

    /// Raw-amplitude forms of the above; in and out must not overlap.
    void apply_shifted(std::span<const cplx> in, std::span<cplx> out, double shift, double scale) const;

    OperatorApply as_operator() const;

    std::span<const double> diagonal() const { return diagonal_; }

  private:
    void apply_kernel(std::span<const cplx> in, std::span<cplx> out, double shift, double scale) const;

    std::shared_ptr<const Cluster> cluster_;
    Couplings couplings_;
    std::vector<double> diagonal_;

    // Pair flips S+_i S-_j + h.c.; coefficient J/2 times the number of bonds
    // joining the pair.
    struct PairFlip {
        std::uint64_t mask;
        unsigned i;
        unsigned j;
        double amplitude;
    };
    std::vector<PairFlip> pair_flips_;

    // Single flips on one site generated by the DMI. For an output
    // configuration with the site down the coefficient is lowering[pattern],
    // pattern being the neighbour bits extracted under neighbour_mask; for the
    // site up it is the complex conjugate.
    struct SiteFlip {
        std::uint64_t neighbour_mask = 0;
        std::vector<cplx> lowering;
    };
    std::vector<SiteFlip> site_flips_;
};

/// Writes "QSPN" | u32 version | u32 n_sites | 2^N (re, im) little-endian f64.
void write_checkpoint(const std::filesystem::path& path, const StateVector& psi);
StateVector read_checkpoint(const std::filesystem::path& path);

inline constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace skyrmion
