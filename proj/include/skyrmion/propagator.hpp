#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "skyrmion/hilbert.hpp"
#include "skyrmion/solver.hpp"

namespace skyrmion {

inline constexpr std::size_t kMinChebyshevOrder = 40;

/// Smallest K >= 40 with |J_K(tau)| + |J_{K+1}(tau)| < tail_tol.
std::size_t chebyshev_order(double tau, double tail_tol);

/// exp(-i t H) by Chebyshev expansion of G = (H - b) / a over fixed steps.
/// Holds a reference to the Hamiltonian, which must outlive it.
class ChebyshevPropagator {
  public:
    ChebyshevPropagator(const Hamiltonian& h, SpectralBounds bounds, double step, double tail_tol = 1e-14);

    const Hamiltonian& hamiltonian() const { return *h_; }
    double e_min() const { return e_min_; }
    double e_max() const { return e_max_; }
    double half_width() const { return (e_max_ - e_min_) / 2.0; }
    double center() const { return (e_max_ + e_min_) / 2.0; }
    double step() const { return step_; }
    std::size_t order() const { return coefficients_.size() - 1; }
    double tail_tol() const { return tail_tol_; }
    /// c_k = (2 - delta_k0) (-i)^k J_k(a step), k = 0..order
    const std::vector<cplx>& coefficients() const { return coefficients_; }

    /// Full steps of `step` plus one shorter step for any remainder.
    /// Renormalizes after each step; throws PhysicsError when a step changes
    /// the norm by more than 1e-8.
    StateVector evolve(const StateVector& psi, double t) const;
    /// Returns the largest |norm - 1| seen before renormalizing.
    double evolve_in_place(StateVector& psi, double t) const;

  private:
    double advance(StateVector& psi, double dt, const std::vector<cplx>& coeffs) const;

    const Hamiltonian* h_;
    double e_min_;
    double e_max_;
    double step_;
    double tail_tol_;
    std::vector<cplx> coefficients_;
};

struct Probe {
    std::string name;
    std::function<double(const StateVector&)> fn;
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;  // values[probe][sample]
};

/// Samples each probe at 0, sample_every, 2 sample_every, ... <= t_max.
TimeSeries evolve_trace(const ChebyshevPropagator& p, const StateVector& psi, double t_max, double sample_every,
                        const std::vector<Probe>& probes);

/// CSV: time,probe_name,value
void write_time_series_csv(std::ostream& os, const TimeSeries& ts);

}  // namespace skyrmion
