#include "skyrmion/observables.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "skyrmion/errors.hpp"
#include "skyrmion/parallel.hpp"

namespace skyrmion {

namespace {

// The three cyclic (a, b, c) orderings of a plaquette.
std::array<std::array<std::size_t, 3>, 3> cyclic(const Plaquette& p) {
    return {{{p[0], p[1], p[2]}, {p[1], p[2], p[0]}, {p[2], p[0], p[1]}}};
}

void check_cluster(const Cluster& c, const StateVector& psi) {
    if (c.n_sites() != psi.n_sites()) {
        throw std::invalid_argument(fmt::format("{}-site state on a {}-site cluster", psi.n_sites(), c.n_sites()));
    }
}

}  // namespace

// S_a . (S_b x S_c) = (i/2) sum_cyclic S^z_a (S+_b S-_c - S-_b S+_c), whose
// expectation is -sum_cyclic Im <S^z_a S+_b S-_c>.
double chirality(const Cluster& c, const StateVector& psi) {
    check_cluster(c, psi);
    const auto amps = psi.amplitudes();
    double total = 0.0;
    for (const Plaquette& p : c.plaquettes()) {
        for (const auto& [a, b, s] : cyclic(p)) {
            const std::uint64_t ma = std::uint64_t{1} << a;
            const std::uint64_t mb = std::uint64_t{1} << b;
            const std::uint64_t mc = std::uint64_t{1} << s;
            const double im = parallel::chunked_sum<double>(psi.dim(), [&](std::size_t lo, std::size_t hi) {
                double acc = 0.0;
                for (std::size_t k = lo; k < hi; ++k) {
                    if ((k & mb) || !(k & mc)) continue;
                    const cplx term = std::conj(amps[k ^ mb ^ mc]) * amps[k];
                    acc += (k & ma) ? 0.5 * term.imag() : -0.5 * term.imag();
                }
                return acc;
            });
            total -= im;
        }
    }
    return total / std::numbers::pi;
}

double chirality(const Cluster& c, const BranchEnsemble& e) {
    double sum = 0.0;
    for (const Branch& b : e.branches) sum += b.probability * chirality(c, b.state);
    return sum;
}

ChiralityValue normalize_chirality(double raw, double q_gs) {
    if (q_gs == 0.0 || !std::isfinite(q_gs)) throw PhysicsError("ground-state chirality reference is zero");
    return {raw, raw / q_gs};
}

OperatorApply chirality_operator(const Cluster& c) {
    return [plaquettes = c.plaquettes(), n = c.n_sites()](const StateVector& in, StateVector& out) {
        if (in.n_sites() != n) throw std::invalid_argument("state and cluster sizes differ");
        out = StateVector(n);
        const cplx half_i{0.0, 0.5 / std::numbers::pi};
        for (const Plaquette& p : plaquettes) {
            for (const auto& [a, b, s] : cyclic(p)) {
                const std::uint64_t ma = std::uint64_t{1} << a;
                const std::uint64_t flip = (std::uint64_t{1} << b) | (std::uint64_t{1} << s);
                const std::uint64_t mb = std::uint64_t{1} << b;
                for (std::size_t k = 0; k < in.dim(); ++k) {
                    const std::uint64_t pattern = k & flip;
                    if (pattern == 0 || pattern == flip) continue;
                    // S+_b S-_c needs b down, c up; S-_b S+_c the reverse.
                    const double sign = (pattern & mb) ? -1.0 : 1.0;
                    const double sz = (k & ma) ? 0.5 : -0.5;
                    out[k ^ flip] += half_i * (sign * sz) * in[k];
                }
            }
        }
    };
}

std::vector<double> magnetization(const StateVector& psi) {
    const auto amps = psi.amplitudes();
    std::vector<double> m(psi.n_sites());
    for (std::size_t i = 0; i < psi.n_sites(); ++i) {
        const std::uint64_t bit = std::uint64_t{1} << i;
        m[i] = parallel::chunked_sum<double>(psi.dim(), [&](std::size_t lo, std::size_t hi) {
            double acc = 0.0;
            for (std::size_t k = lo; k < hi; ++k) acc += (k & bit) ? 0.5 * std::norm(amps[k]) : -0.5 * std::norm(amps[k]);
            return acc;
        });
    }
    return m;
}

double mean_magnetization(const StateVector& psi) {
    const std::vector<double> m = magnetization(psi);
    double sum = 0.0;
    for (double v : m) sum += v;
    return sum / static_cast<double>(m.size());
}

double overlap(const StateVector& anchor, const StateVector& current) { return std::abs(inner(anchor, current)); }

double weighted_overlap(const BranchEnsemble& e) {
    double sum = 0.0;
    for (const Branch& b : e.branches) {
        if (b.anchor_state.dim() != b.state.dim()) throw std::invalid_argument("branch without an anchor state");
        sum += b.probability * overlap(b.anchor_state, b.state);
    }
    return sum;
}

Eigen::MatrixXd correlation_matrix(const StateVector& psi) {
    const std::size_t n = psi.n_sites();
    const auto amps = psi.amplitudes();
    Eigen::MatrixXd c(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        c(j, j) = 0.25;
        for (std::size_t k = j + 1; k < n; ++k) {
            const double v = parallel::chunked_sum<double>(psi.dim(), [&](std::size_t lo, std::size_t hi) {
                double acc = 0.0;
                for (std::size_t x = lo; x < hi; ++x) {
                    const bool differ = ((x >> j) ^ (x >> k)) & 1U;
                    acc += differ ? -std::norm(amps[x]) : std::norm(amps[x]);
                }
                return acc;
            });
            c(j, k) = c(k, j) = 0.25 * v;
        }
    }
    return c;
}

Eigen::MatrixXd correlation_matrix(const BranchEnsemble& e) {
    if (e.branches.empty()) throw std::invalid_argument("empty ensemble");
    const std::size_t n = e.branches.front().state.n_sites();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (const Branch& b : e.branches) c += b.probability * correlation_matrix(b.state);
    for (std::size_t j = 0; j < n; ++j) c(j, j) = 0.25;
    return c;
}

StructureFactorMap structure_factor(const Eigen::MatrixXd& corr, const Cluster& c, const std::vector<Vec2>& q_points) {
    const std::size_t n = c.n_sites();
    if (static_cast<std::size_t>(corr.rows()) != n || static_cast<std::size_t>(corr.cols()) != n) {
        throw std::invalid_argument("correlation matrix size does not match the cluster");
    }
    std::vector<Vec2> d(n * n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) d[j * n + k] = c.displacement(k, j);
    }
    StructureFactorMap map;
    map.q_points = q_points;
    map.values.resize(q_points.size());
    for (std::size_t m = 0; m < q_points.size(); ++m) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                const double phase = q_points[m].dot(d[j * n + k]);
                re += std::cos(phase) * corr(j, k);
                im += std::sin(phase) * corr(j, k);
            }
        }
        re /= static_cast<double>(n);
        im /= static_cast<double>(n);
        if (std::abs(im) > 1e-8) {
            throw PhysicsError(fmt::format("structure factor at q = ({}, {}) has imaginary part {:.3e}; correlation "
                                           "matrix is not symmetric",
                                           q_points[m].x, q_points[m].y, im));
        }
        map.values[m] = re;
    }
    return map;
}

void write_structure_factor_csv(std::ostream& os, const StructureFactorMap& m) {
    fmt::print(os, "qx,qy,intensity\n");
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        fmt::print(os, "{:.17g},{:.17g},{:.17g}\n", m.q_points[i].x, m.q_points[i].y, m.values[i]);
    }
}

void write_correlation_csv(std::ostream& os, const Eigen::MatrixXd& corr) {
    fmt::print(os, "site");
    for (Eigen::Index k = 0; k < corr.cols(); ++k) fmt::print(os, ",{}", k);
    fmt::print(os, "\n");
    for (Eigen::Index j = 0; j < corr.rows(); ++j) {
        fmt::print(os, "{}", j);
        for (Eigen::Index k = 0; k < corr.cols(); ++k) fmt::print(os, ",{:.17g}", corr(j, k));
        fmt::print(os, "\n");
    }
}

}  // namespace skyrmion
