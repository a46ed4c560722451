#include "doctest.h"

#include <sstream>

#include "oracle/dense.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/solver.hpp"

using namespace skyrmion;

namespace {

std::shared_ptr<const Cluster> cluster(int a, int b) { return std::make_shared<const Cluster>(a, b); }

Eigen::VectorXd dense_spectrum(const Cluster& c, const Couplings& k) {
    Eigen::SelfAdjointEigenSolver<oracle::Mat> es(oracle::hamiltonian(c, k), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

}  // namespace

TEST_CASE("ground state energy matches dense diagonalization") {
    for (auto [a, b] : {std::pair{1, 1}, {2, 1}, {3, 0}}) {
        const auto c = cluster(a, b);
        for (const Couplings k : {Couplings{-0.5, 1.0, 0.5}, Couplings{0.8, 1.0, -0.3}}) {
            const Hamiltonian h(c, k);
            const EigenResult r = ground_state(h, 1e-9);
            CAPTURE(c->n_sites());
            REQUIRE(r.converged);
            const Eigen::VectorXd levels = dense_spectrum(*c, k);
            CHECK(std::abs(r.energies[0] - levels(0)) < 1e-10);
            CHECK(r.residuals[0] <= 1e-9);
            CHECK(r.states[0].norm() == doctest::Approx(1.0).epsilon(1e-12));
            const StateVector hpsi = h.apply(r.states[0]);
            CHECK(inner(r.states[0], hpsi).real() == doctest::Approx(levels(0)).epsilon(1e-10));
        }
    }
}

TEST_CASE("saturated field limit") {
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {0.0, 0.0, 1.0});
    const EigenResult r = ground_state(h, 1e-10);
    REQUIRE(r.converged);
    CHECK(r.energies[0] == doctest::Approx(-3.5).epsilon(1e-12));
    CHECK(std::norm(r.states[0][0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(r.degeneracy_flags[0]);
    REQUIRE(r.next_energy.has_value());
    CHECK(*r.next_energy == doctest::Approx(-2.5).epsilon(1e-10));
}

TEST_CASE("degenerate ground state is flagged") {
    // Pure exchange on the 7-site cluster conserves total S, so a
    // ferromagnetic ground state is an (N+1)-fold multiplet split only by B.
    // At B = 0 the lowest level is degenerate and must be flagged.
    const auto c = cluster(2, 1);
    const Hamiltonian h(c, {-1.0, 0.0, 0.0});
    const EigenResult r = ground_state(h, 1e-9);
    REQUIRE(r.converged);
    CHECK(r.energies[0] == doctest::Approx(dense_spectrum(*c, {-1.0, 0.0, 0.0})(0)).epsilon(1e-10));
    CHECK(r.degeneracy_flags[0]);
}

TEST_CASE("spectral bounds enclose the dense spectrum") {
    const auto c = cluster(3, 0);
    const Couplings k{-0.5, 1.0, 0.5};
    const Hamiltonian h(c, k);
    const SpectralBounds bounds = extremal_eigenvalues(h, 1e-9);
    const Eigen::VectorXd levels = dense_spectrum(*c, k);
    const double width = levels(levels.size() - 1) - levels(0);
    CHECK(bounds.e_min <= levels(0));
    CHECK(bounds.e_max >= levels(levels.size() - 1));
    CHECK(levels(0) - bounds.e_min == doctest::Approx(1e-6 * width).epsilon(1e-3));
    CHECK(bounds.e_max - levels(levels.size() - 1) == doctest::Approx(1e-6 * width).epsilon(1e-3));
}

TEST_CASE("low spectrum recovers the full 3-site spectrum") {
    const auto c = cluster(1, 1);
    const Couplings k{-0.5, 1.0, 0.5};
    const Hamiltonian h(c, k);
    const EigenResult r = low_spectrum(h, 8, 1e-9);
    REQUIRE(r.converged);
    REQUIRE(r.energies.size() == 8);
    const Eigen::VectorXd levels = dense_spectrum(*c, k);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(r.energies[i] - levels(static_cast<Eigen::Index>(i))) < 1e-10);
}

TEST_CASE("low spectrum on the 9-site cluster") {
    const auto c = cluster(3, 0);
    const Couplings k{-0.5, 1.0, 0.5};
    const Hamiltonian h(c, k);
    const Eigen::VectorXd levels = dense_spectrum(*c, k);
    const EigenResult r6 = low_spectrum(h, 6, 1e-9);
    REQUIRE(r6.converged);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(r6.energies[i] - levels(static_cast<Eigen::Index>(i))) < 1e-9);
        CHECK(r6.residuals[i] <= 1e-9);
        if (i > 0) CHECK(r6.energies[i] >= r6.energies[i - 1]);
        for (std::size_t j = 0; j < 6; ++j) {
            const double expected = i == j ? 1.0 : 0.0;
            CHECK(std::abs(inner(r6.states[i], r6.states[j]) - expected) < 1e-8);
        }
    }
    const EigenResult r3 = low_spectrum(h, 3, 1e-9);
    for (std::size_t i = 0; i < 3; ++i) CHECK(r3.energies[i] == doctest::Approx(r6.energies[i]).epsilon(1e-10));
    const EigenResult r1 = low_spectrum(h, 1, 1e-9);
    CHECK(r1.energies[0] == doctest::Approx(ground_state(h, 1e-9).energies[0]).epsilon(1e-12));
}

TEST_CASE("capacity and argument checks") {
    const Hamiltonian h(cluster(2, 1), {});
    CHECK_THROWS_AS(low_spectrum(h, 65, 1e-9), std::length_error);
    CHECK_THROWS_AS(low_spectrum(h, 0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(ground_state(h, 0.0), std::invalid_argument);
}

TEST_CASE("budget exhaustion is reported, not hidden") {
    const Hamiltonian h(cluster(3, 0), {});
    SolverOptions opts;
    opts.max_matvecs = 5;
    opts.basis_size = 4;
    const EigenResult r = ground_state(h, 1e-12, opts);
    CHECK_FALSE(r.converged);
    CHECK_THROWS_AS(r.require_converged("test"), PhysicsError);
}

TEST_CASE("spectrum CSV") {
    const Hamiltonian h(cluster(1, 1), {});
    const EigenResult r = low_spectrum(h, 3, 1e-9);
    std::ostringstream os;
    write_spectrum_csv(os, r);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "index,energy,residual,degenerate_flag");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);
}
