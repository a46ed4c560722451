#include "skyrmion/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "skyrmion/errors.hpp"

namespace skyrmion {

namespace {

std::vector<cplx> chebyshev_coefficients(double tau, double tail_tol) {
    const std::size_t order = chebyshev_order(tau, tail_tol);
    std::vector<cplx> c(order + 1);
    const cplx minus_i{0.0, -1.0};
    cplx phase{1.0, 0.0};
    for (std::size_t k = 0; k <= order; ++k) {
        const double weight = k == 0 ? 1.0 : 2.0;
        c[k] = weight * phase * std::cyl_bessel_j(static_cast<double>(k), tau);
        phase *= minus_i;
    }
    return c;
}

}  // namespace

std::size_t chebyshev_order(double tau, double tail_tol) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw std::invalid_argument("Chebyshev argument must be finite and >= 0");
    if (!(tail_tol > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
    // J_k(tau) decays faster than exponentially once k exceeds tau.
    const auto limit = static_cast<std::size_t>(2.0 * tau) + 200;
    for (std::size_t k = kMinChebyshevOrder; k < limit; ++k) {
        const double tail = std::abs(std::cyl_bessel_j(static_cast<double>(k), tau)) +
                            std::abs(std::cyl_bessel_j(static_cast<double>(k + 1), tau));
        if (tail < tail_tol) return k;
    }
    throw std::invalid_argument(fmt::format("no Chebyshev order below {} reaches tail {:.1e} at tau = {}", limit,
                                            tail_tol, tau));
}

ChebyshevPropagator::ChebyshevPropagator(const Hamiltonian& h, SpectralBounds bounds, double step, double tail_tol)
    : h_(&h), e_min_(bounds.e_min), e_max_(bounds.e_max), step_(step), tail_tol_(tail_tol) {
    if (!(e_min_ < e_max_)) {
        throw std::invalid_argument(fmt::format("spectral bounds must satisfy e_min < e_max, got [{}, {}]", e_min_, e_max_));
    }
    if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("time step must be positive");
    coefficients_ = chebyshev_coefficients(half_width() * step_, tail_tol_);
}

double ChebyshevPropagator::advance(StateVector& psi, double dt, const std::vector<cplx>& coeffs) const {
    const std::size_t dim = psi.dim();
    const double a = half_width();
    const double b = center();
    const auto n = static_cast<std::ptrdiff_t>(dim);

    std::vector<cplx> prev(psi.amplitudes().begin(), psi.amplitudes().end());
    std::vector<cplx> cur(dim);
    std::vector<cplx> next(dim);
    std::vector<cplx> acc(dim);

    // T_1 = G psi
    h_->apply_shifted(prev, cur, b, 1.0 / a);
    const cplx c0 = coeffs[0];
    const cplx c1 = coeffs[1];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) acc[i] = c0 * prev[i] + c1 * cur[i];

    for (std::size_t k = 2; k < coeffs.size(); ++k) {
        // T_k = 2 G T_{k-1} - T_{k-2}
        h_->apply_shifted(cur, next, b, 2.0 / a);
        const cplx ck = coeffs[k];
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            next[i] -= prev[i];
            acc[i] += ck * next[i];
        }
        std::swap(prev, cur);
        std::swap(cur, next);
    }

    const cplx phase = std::polar(1.0, -b * dt);
    auto out = psi.amplitudes();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = phase * acc[i];

    const double norm = psi.normalize();
    if (std::abs(norm - 1.0) > 1e-8) {
        throw PhysicsError(fmt::format("Chebyshev step changed the norm to {:.12f}; spectral bounds [{}, {}] are "
                                       "probably too narrow for this Hamiltonian",
                                       norm, e_min_, e_max_));
    }
    return std::abs(norm - 1.0);
}

double ChebyshevPropagator::evolve_in_place(StateVector& psi, double t) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("evolution time must be finite and >= 0");
    if (psi.dim() != h_->dim()) throw std::invalid_argument("state and Hamiltonian dimensions differ");
    if (std::abs(psi.norm() - 1.0) > 1e-8) throw std::invalid_argument("evolve expects a normalized state");
    const double ratio = t / step_;
    auto full = static_cast<std::size_t>(std::floor(ratio + 1e-9));
    double remainder = t - static_cast<double>(full) * step_;
    if (remainder < 1e-12 * step_) remainder = 0.0;
    double drift = 0.0;
    for (std::size_t s = 0; s < full; ++s) drift = std::max(drift, advance(psi, step_, coefficients_));
    if (remainder > 0.0) {
        drift = std::max(drift, advance(psi, remainder, chebyshev_coefficients(half_width() * remainder, tail_tol_)));
    }
    return drift;
}

StateVector ChebyshevPropagator::evolve(const StateVector& psi, double t) const {
    StateVector out = psi;
    evolve_in_place(out, t);
    return out;
}

TimeSeries evolve_trace(const ChebyshevPropagator& p, const StateVector& psi, double t_max, double sample_every,
                        const std::vector<Probe>& probes) {
    if (!(sample_every >= p.step())) throw std::invalid_argument("sample interval must be at least the time step");
    if (!(t_max >= 0.0)) throw std::invalid_argument("t_max must be >= 0");
    TimeSeries ts;
    for (const auto& probe : probes) ts.names.push_back(probe.name);
    ts.values.resize(probes.size());
    const auto samples = static_cast<std::size_t>(std::floor(t_max / sample_every + 1e-9)) + 1;
    StateVector state = psi;
    for (std::size_t s = 0; s < samples; ++s) {
        if (s > 0) p.evolve_in_place(state, sample_every);
        ts.times.push_back(static_cast<double>(s) * sample_every);
        for (std::size_t k = 0; k < probes.size(); ++k) ts.values[k].push_back(probes[k].fn(state));
    }
    return ts;
}

void write_time_series_csv(std::ostream& os, const TimeSeries& ts) {
    fmt::print(os, "time,probe_name,value\n");
    for (std::size_t s = 0; s < ts.times.size(); ++s) {
        for (std::size_t k = 0; k < ts.names.size(); ++k) {
            fmt::print(os, "{:.17g},{},{:.17g}\n", ts.times[s], ts.names[k], ts.values[k][s]);
        }
    }
}

}  // namespace skyrmion
