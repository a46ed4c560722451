#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "oracle/dense.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/propagator.hpp"

using namespace skyrmion;

namespace {

std::shared_ptr<const Cluster> cluster(int a, int b) { return std::make_shared<const Cluster>(a, b); }

// J_n(x) = (1/2pi) int_0^{2pi} cos(n theta - x sin theta) dtheta; the trapezoid
// rule converges geometrically for this periodic integrand.
double bessel_quadrature(int n, double x) {
    constexpr int kPoints = 1024;
    double sum = 0.0;
    for (int k = 0; k < kPoints; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / kPoints;
        sum += std::cos(n * theta - x * std::sin(theta));
    }
    return sum / kPoints;
}

}  // namespace

TEST_CASE("order floor and Bessel tail") {
    CHECK(chebyshev_order(0.0, 1e-14) == 40);
    CHECK(chebyshev_order(1e-3, 1e-14) == 40);
    CHECK(chebyshev_order(5.0, 1e-14) == 40);

    const std::size_t k = chebyshev_order(50.0, 1e-14);
    CHECK(k > 50);
    const int ki = static_cast<int>(k);
    CHECK(std::abs(bessel_quadrature(ki, 50.0)) + std::abs(bessel_quadrature(ki + 1, 50.0)) < 1e-14);
    CHECK(std::abs(bessel_quadrature(ki - 1, 50.0)) + std::abs(bessel_quadrature(ki, 50.0)) >= 1e-14);
    for (int n : {0, 1, 7, 40, 55}) CHECK(std::cyl_bessel_j(n, 50.0) == doctest::Approx(bessel_quadrature(n, 50.0)).epsilon(1e-10));
}

TEST_CASE("tiny step coefficients approach the identity") {
    const auto c = cluster(1, 1);
    const Hamiltonian h(c, {});
    const ChebyshevPropagator p(h, {-1.0, 1.0}, 1e-12);
    CHECK(p.order() == 40);
    CHECK(std::abs(p.coefficients()[0] - 1.0) < 1e-15);
    for (std::size_t k = 1; k < p.coefficients().size(); ++k) CHECK(std::abs(p.coefficients()[k]) < 1e-11);
}

TEST_CASE("matches dense exponential") {
    for (auto [a, b] : {std::pair{1, 1}, {2, 0}, {2, 1}}) {
        const auto c = cluster(a, b);
        const Couplings k{-0.5, 1.0, 0.5};
        const Hamiltonian h(c, k);
        const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 0.05);
        const oracle::Mat dense = oracle::hamiltonian(*c, k);
        const StateVector psi = StateVector::random(c->n_sites(), 5);
        for (double t : {0.1, 1.0, 10.0}) {
            CAPTURE(c->n_sites());
            CAPTURE(t);
            CHECK(oracle::max_abs_diff(p.evolve(psi, t), oracle::evolve(dense, oracle::to_eigen(psi), t)) < 1e-10);
        }
        // Times that are not multiples of the step.
        CHECK(oracle::max_abs_diff(p.evolve(psi, 0.123), oracle::evolve(dense, oracle::to_eigen(psi), 0.123)) < 1e-10);
    }
}

TEST_CASE("long steps with a higher order") {
    const auto c = cluster(2, 1);
    const Couplings k{-0.5, 1.0, 0.5};
    const Hamiltonian h(c, k);
    const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 5.0);
    CHECK(p.order() > 40);
    const StateVector psi = StateVector::random(7, 17);
    CHECK(oracle::max_abs_diff(p.evolve(psi, 10.0), oracle::evolve(oracle::hamiltonian(*c, k), oracle::to_eigen(psi), 10.0)) <
          1e-10);
}

TEST_CASE("zero time is the identity") {
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {});
    const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 0.05);
    const StateVector psi = StateVector::random(7, 2);
    CHECK(p.evolve(psi, 0.0) == psi);
}

TEST_CASE("eigenstates only acquire a phase") {
    const auto c = cluster(3, 0);
    const Hamiltonian h(c, {});
    const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 0.05);
    const EigenResult gs = ground_state(h, 1e-11);
    const double t = 7.3;
    const StateVector out = p.evolve(gs.states[0], t);
    const cplx ov = inner(gs.states[0], out);
    CHECK(std::abs(ov) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(ov - std::polar(1.0, -gs.energies[0] * t)) < 1e-9);
}

TEST_CASE("composition") {
    const auto c = cluster(3, 0);
    const Hamiltonian h(c, {});
    const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 0.05);
    const StateVector psi = StateVector::random(9, 8);
    const StateVector twice = p.evolve(p.evolve(psi, 1.3), 2.17);
    const StateVector once = p.evolve(psi, 3.47);
    double m = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) m = std::max(m, std::abs(twice[i] - once[i]));
    CHECK(m < 1e-9);
}

TEST_CASE("unitarity and energy conservation to t = 300") {
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {});
    const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 0.05);
    StateVector psi = StateVector::random(7, 31);
    const double e0 = expectation(h.as_operator(), psi);
    double drift = 0.0;
    double worst_energy = 0.0;
    for (int block = 0; block < 30; ++block) {
        drift = std::max(drift, p.evolve_in_place(psi, 10.0));
        worst_energy = std::max(worst_energy, std::abs(expectation(h.as_operator(), psi) - e0) / std::abs(e0));
    }
    CHECK(drift < 1e-10);
    CHECK(worst_energy < 1e-9);
}

TEST_CASE("without DMI total S^z is conserved") {
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {0.7, 0.0, 0.3});
    const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 0.05);
    // Superposition inside the two-up sector stays there.
    StateVector psi(7);
    psi[0b0000011] = {0.6, 0.0};
    psi[0b0101000] = {0.0, 0.8};
    const StateVector out = p.evolve(psi, 4.0);
    double outside = 0.0;
    for (std::size_t cfg = 0; cfg < out.dim(); ++cfg) {
        if (std::popcount(cfg) != 2) outside += std::norm(out[cfg]);
    }
    CHECK(outside < 1e-20);
}

TEST_CASE("narrow bounds are detected") {
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {});
    const SpectralBounds true_bounds = extremal_eigenvalues(h, 1e-10);
    // With a short step the truncated series still converges outside
    // [-1, 1]; a long one does not.
    const ChebyshevPropagator p(h, {true_bounds.e_min, true_bounds.e_min + 0.3}, 5.0);
    CHECK_THROWS_AS(p.evolve(StateVector::random(7, 1), 5.0), PhysicsError);
}

TEST_CASE("argument checks") {
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {});
    CHECK_THROWS_AS(ChebyshevPropagator(h, {-1.0, 1.0}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ChebyshevPropagator(h, {1.0, 1.0}, 0.1), std::invalid_argument);
    const ChebyshevPropagator p(h, {-20.0, 20.0}, 0.1);
    CHECK_THROWS_AS(p.evolve(StateVector::random(7, 1), -1.0), std::invalid_argument);
    CHECK_THROWS_AS(evolve_trace(p, StateVector::random(7, 1), 1.0, 0.01, {}), std::invalid_argument);
}

TEST_CASE("time trace") {
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {});
    const ChebyshevPropagator p(h, extremal_eigenvalues(h, 1e-10), 0.05);
    const StateVector psi = StateVector::random(7, 4);
    const std::vector<Probe> probes = {
        {"norm", [](const StateVector& s) { return s.norm(); }},
        {"energy", [&h](const StateVector& s) { return expectation(h.as_operator(), s); }},
    };
    const TimeSeries ts = evolve_trace(p, psi, 2.0, 0.5, probes);
    REQUIRE(ts.times.size() == 5);
    CHECK(ts.times.back() == doctest::Approx(2.0));
    for (double v : ts.values[0]) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    for (double v : ts.values[1]) CHECK(v == doctest::Approx(ts.values[1][0]).epsilon(1e-9));

    std::ostringstream os;
    write_time_series_csv(os, ts);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "time,probe_name,value");
    std::getline(is, line);
    CHECK(line.rfind("0,norm,", 0) == 0);
}
