#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "skyrmion/hilbert.hpp"

namespace skyrmion {

/// Seed of the Lanczos start vector. Fixed so runs, and every branch
/// probability derived from the ground state, are reproducible.
inline constexpr std::uint64_t kLanczosSeed = 0x51a7'e5ee'd000'0001ULL;

struct SolverOptions {
    double residual_tol = 1e-9;
    double degeneracy_tol = 1e-8;
    std::size_t max_matvecs = 20000;
    /// Krylov basis size; 0 picks max(2k, k + 24) capped at the dimension.
    std::size_t basis_size = 0;
    /// Largest k accepted by low_spectrum (memory bound at N = 19).
    std::size_t max_states = 64;
    std::uint64_t seed = kLanczosSeed;
};

struct EigenResult {
    std::vector<double> energies;  // ascending
    std::vector<StateVector> states;
    std::vector<double> residuals;  // ||H psi - E psi||, recomputed explicitly
    std::vector<bool> degeneracy_flags;
    bool converged = false;
    std::size_t matvecs = 0;
    /// First level above the returned ones, when the iteration resolved it.
    /// ground_state uses it to decide whether the ground state is degenerate.
    std::optional<double> next_energy;

    double max_residual() const;
    /// Throws PhysicsError naming the best residual reached when not converged.
    void require_converged(const char* what) const;
};

using RawOperator = std::function<void(std::span<const cplx> in, std::span<cplx> out)>;

/// Thick-restart Lanczos with full (twice classical Gram-Schmidt)
/// reorthogonalization for the `nev` lowest eigenpairs of a Hermitian operator.
EigenResult lowest_eigenpairs(const RawOperator& op, std::size_t n_sites, std::size_t nev, const SolverOptions& opts);

/// Lowest eigenpair. The iteration also converges the next level, and
/// degeneracy_flags[0] is set when E1 - E0 < degeneracy_tol.
EigenResult ground_state(const Hamiltonian& h, double residual_tol, SolverOptions opts = {});

struct SpectralBounds {
    double e_min;
    double e_max;
};

/// Extremal eigenvalues from Lanczos on H and on -H, each widened outward by
/// 1e-6 (E_max - E_min).
SpectralBounds extremal_eigenvalues(const Hamiltonian& h, double tol, SolverOptions opts = {});

/// The k lowest eigenpairs; throws std::length_error above opts.max_states.
EigenResult low_spectrum(const Hamiltonian& h, std::size_t k, double residual_tol, SolverOptions opts = {});

/// CSV: index,energy,residual,degenerate_flag
void write_spectrum_csv(std::ostream& os, const EigenResult& r);

}  // namespace skyrmion
