#pragma once

// Dense-matrix reference implementations for small clusters. Everything here
// is built from textbook single-site spin matrices and Kronecker-style
// embedding, independent of the bit-manipulation kernels under test.

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>

#include <Eigen/Dense>

#include "skyrmion/hilbert.hpp"
#include "skyrmion/lattice.hpp"

namespace oracle {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Local = std::array<std::array<cplx, 2>, 2>;  // [row][col], index 0 = down, 1 = up

inline Local sx() { return {{{0.0, 0.5}, {0.5, 0.0}}}; }
inline Local sy() { return {{{0.0, cplx{0.0, 0.5}}, {cplx{0.0, -0.5}, 0.0}}}; }
inline Local sz() { return {{{-0.5, 0.0}, {0.0, 0.5}}}; }
inline std::array<Local, 3> spin() { return {sx(), sy(), sz()}; }

/// Product of local operators on distinct sites, embedded in the 2^N space.
inline Mat embed(std::size_t n_sites, std::initializer_list<std::pair<std::size_t, Local>> factors) {
    const std::size_t dim = std::size_t{1} << n_sites;
    Mat m = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    std::uint64_t support = 0;
    for (const auto& f : factors) support |= std::uint64_t{1} << f.first;
    for (std::size_t col = 0; col < dim; ++col) {
        // Enumerate all rows that agree with col outside the support.
        for (std::uint64_t sub = support;; sub = (sub - 1) & support) {
            const std::size_t row = (col & ~support) | sub;
            cplx v = 1.0;
            for (const auto& [site, op] : factors) v *= op[(row >> site) & 1U][(col >> site) & 1U];
            m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += v;
            if (sub == 0) break;
        }
    }
    return m;
}

inline Mat hamiltonian(const skyrmion::Cluster& c, const skyrmion::Couplings& k) {
    const std::size_t n = c.n_sites();
    const std::size_t dim = std::size_t{1} << n;
    Mat h = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto s = spin();
    for (const auto& b : c.bonds()) {
        for (int a = 0; a < 3; ++a) h += k.J * embed(n, {{b.i, s[a]}, {b.j, s[a]}});
        // D . (S_i x S_j) with D in plane: x and y components of the cross product.
        const double dx = k.D * b.dmi.x;
        const double dy = k.D * b.dmi.y;
        h += dx * (embed(n, {{b.i, s[1]}, {b.j, s[2]}}) - embed(n, {{b.i, s[2]}, {b.j, s[1]}}));
        h += dy * (embed(n, {{b.i, s[2]}, {b.j, s[0]}}) - embed(n, {{b.i, s[0]}, {b.j, s[2]}}));
    }
    for (std::size_t i = 0; i < n; ++i) h += k.B * embed(n, {{i, s[2]}});
    return h;
}

/// (1/pi) sum over plaquettes of S_i . (S_j x S_k), via the Levi-Civita symbol.
inline Mat chirality(const skyrmion::Cluster& c) {
    const std::size_t n = c.n_sites();
    const std::size_t dim = std::size_t{1} << n;
    Mat q = Mat::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const auto s = spin();
    const int perms[6][4] = {{0, 1, 2, 1}, {1, 2, 0, 1}, {2, 0, 1, 1}, {0, 2, 1, -1}, {2, 1, 0, -1}, {1, 0, 2, -1}};
    for (const auto& p : c.plaquettes()) {
        for (const auto& e : perms) {
            q += static_cast<double>(e[3]) * embed(n, {{p[0], s[e[0]]}, {p[1], s[e[1]]}, {p[2], s[e[2]]}});
        }
    }
    return q / std::numbers::pi;
}

inline Vec to_eigen(const skyrmion::StateVector& psi) {
    Vec v(static_cast<Eigen::Index>(psi.dim()));
    for (std::size_t k = 0; k < psi.dim(); ++k) v(static_cast<Eigen::Index>(k)) = psi[k];
    return v;
}

inline skyrmion::StateVector from_eigen(std::size_t n_sites, const Vec& v) {
    skyrmion::StateVector s(n_sites);
    for (std::size_t k = 0; k < s.dim(); ++k) s[k] = v(static_cast<Eigen::Index>(k));
    return s;
}

/// exp(-i H t) psi by full diagonalization.
inline Vec evolve(const Mat& h, const Vec& psi, double t) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Vec coeffs = es.eigenvectors().adjoint() * psi;
    Vec phased(coeffs.size());
    for (Eigen::Index k = 0; k < coeffs.size(); ++k) {
        phased(k) = std::exp(cplx{0.0, -es.eigenvalues()(k) * t}) * coeffs(k);
    }
    return es.eigenvectors() * phased;
}

inline double max_abs_diff(const skyrmion::StateVector& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.dim(); ++k) m = std::max(m, std::abs(a[k] - b(static_cast<Eigen::Index>(k))));
    return m;
}

}  // namespace oracle
