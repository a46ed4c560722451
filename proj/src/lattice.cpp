#include "skyrmion/lattice.hpp"

#include <algorithm>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace skyrmion {

namespace {

constexpr double kTieTol = 1e-9;

long floor_div(long num, long den) {
    long q = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
    return q;
}

Vec2 lattice_point(long n1, long n2) {
    return static_cast<double>(n1) * kA1 + static_cast<double>(n2) * kA2;
}

double polar_angle(Vec2 v) {
    double phi = std::atan2(v.y, v.x);
    if (phi < -kTieTol) phi += 2.0 * std::numbers::pi;
    return std::max(phi, 0.0);
}

// Orders points by distance from the origin, then counter-clockwise from +x.
bool shell_order(Vec2 lhs, Vec2 rhs) {
    const double dl = lhs.norm();
    const double dr = rhs.norm();
    if (std::abs(dl - dr) > kTieTol) return dl < dr;
    return polar_angle(lhs) < polar_angle(rhs) - kTieTol;
}

// Shortest representative of d modulo the lattice spanned by (g1, g2).
// Candidates are scanned in a fixed order and the first shortest one wins.
Vec2 shortest_image(Vec2 d, Vec2 g1, Vec2 g2) {
    // Reduce into the fundamental parallelogram first so the search window is small.
    const double det = g1.cross(g2);
    const double f1 = d.cross(g2) / det;
    const double f2 = g1.cross(d) / det;
    const Vec2 base = d - std::floor(f1) * g1 - std::floor(f2) * g2;
    Vec2 best = base;
    double best_len = std::numeric_limits<double>::infinity();
    for (int m1 = -2; m1 <= 2; ++m1) {
        for (int m2 = -2; m2 <= 2; ++m2) {
            const Vec2 cand = base + static_cast<double>(m1) * g1 + static_cast<double>(m2) * g2;
            const double len = cand.norm();
            if (len < best_len - kTieTol) {
                best = cand;
                best_len = len;
            }
        }
    }
    return best;
}

}  // namespace

Cluster::Cluster(int a, int b) : a_(a), b_(b) {
    if (a < 1 || b < 0) {
        throw std::invalid_argument(fmt::format("cluster tilt requires a >= 1 and b >= 0, got ({}, {})", a, b));
    }
    const long n = static_cast<long>(a) * a + static_cast<long>(a) * b + static_cast<long>(b) * b;
    if (n < 3) {
        throw std::invalid_argument(fmt::format("cluster ({}, {}) has {} sites; at least 3 are needed for a plaquette", a, b, n));
    }
    translations_ = {lattice_point(a, b), lattice_point(-b, a + b)};

    // Collect one canonical integer representative per site.
    std::vector<std::array<long, 2>> reps;
    const long range = a + b + 1;
    for (long n1 = -range; n1 <= range; ++n1) {
        for (long n2 = -range; n2 <= range; ++n2) {
            const auto r = reduce(n1, n2);
            if (std::find(reps.begin(), reps.end(), r) == reps.end()) reps.push_back(r);
        }
    }
    if (static_cast<long>(reps.size()) != n) {
        throw std::logic_error("cluster enumeration produced the wrong number of sites");
    }

    // Place each site at its minimum image around the origin; origin first,
    // then shells outward.
    std::vector<std::pair<Vec2, std::array<long, 2>>> placed;
    placed.reserve(reps.size());
    for (const auto& r : reps) placed.emplace_back(minimum_image(lattice_point(r[0], r[1])), r);
    std::stable_sort(placed.begin(), placed.end(), [](const auto& l, const auto& r) { return shell_order(l.first, r.first); });
    for (const auto& [pos, r] : placed) {
        positions_.push_back(pos);
        coords_.push_back(r);
    }

    const std::array<std::array<long, 2>, 3> forward{{{1, 0}, {0, 1}, {-1, 1}}};
    for (std::size_t i = 0; i < coords_.size(); ++i) {
        for (const auto& step : forward) {
            const std::size_t j = site_at(coords_[i][0] + step[0], coords_[i][1] + step[1]);
            const Vec2 e = lattice_point(step[0], step[1]);
            bonds_.push_back(Bond{i, j, e, Vec2{-e.y, e.x}});
        }
        plaquettes_.push_back({i, site_at(coords_[i][0] + 1, coords_[i][1]), site_at(coords_[i][0], coords_[i][1] + 1)});
    }

    Vec2 centroid;
    for (const auto& p : positions_) centroid = centroid + p;
    centroid = centroid * (1.0 / static_cast<double>(positions_.size()));
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        const double d = minimum_image(positions_[i] - centroid).norm();
        if (d < best - kTieTol) {
            best = d;
            center_site_ = i;
        }
    }

    // Dual basis: g_i . T_j = 2 pi delta_ij.
    const Vec2 t1 = translations_[0];
    const Vec2 t2 = translations_[1];
    const double det = t1.cross(t2);
    const double two_pi = 2.0 * std::numbers::pi;
    const Vec2 g1 = Vec2{t2.y, -t2.x} * (two_pi / det);
    const Vec2 g2 = Vec2{-t1.y, t1.x} * (two_pi / det);
    const auto [b1, b2] = reciprocal_basis();
    for (long n1 = 0; n1 < n; ++n1) {
        for (long n2 = 0; n2 < n; ++n2) {
            const Vec2 q = fold_to_brillouin_zone(static_cast<double>(n1) * g1 + static_cast<double>(n2) * g2);
            const bool seen = std::any_of(momenta_.begin(), momenta_.end(), [&](Vec2 p) {
                return shortest_image(q - p, b1, b2).norm() < 1e-8;
            });
            if (!seen) momenta_.push_back(q);
        }
    }
    std::stable_sort(momenta_.begin(), momenta_.end(), shell_order);
    if (static_cast<long>(momenta_.size()) != n) {
        throw std::logic_error("momentum enumeration produced the wrong number of points");
    }
}

std::array<long, 2> Cluster::reduce(long n1, long n2) const {
    const long n = static_cast<long>(a_) * a_ + static_cast<long>(a_) * b_ + static_cast<long>(b_) * b_;
    // Integer fractional coordinates with respect to (T1, T2), scaled by N.
    const long k1 = floor_div((a_ + b_) * n1 + b_ * n2, n);
    const long k2 = floor_div(-b_ * n1 + a_ * n2, n);
    return {n1 - k1 * a_ + k2 * b_, n2 - k1 * b_ - k2 * (a_ + b_)};
}

Vec2 Cluster::minimum_image(Vec2 d) const {
    return shortest_image(d, translations_[0], translations_[1]);
}

std::size_t Cluster::site_at(long n1, long n2) const {
    const auto r = reduce(n1, n2);
    const auto it = std::find(coords_.begin(), coords_.end(), r);
    if (it == coords_.end()) throw std::logic_error("lattice point does not reduce to a cluster site");
    return static_cast<std::size_t>(it - coords_.begin());
}

Vec2 Cluster::displacement(std::size_t i, std::size_t j) const {
    if (i >= n_sites() || j >= n_sites()) {
        throw std::out_of_range(fmt::format("site index out of range ({}, {}) for {} sites", i, j, n_sites()));
    }
    if (i == j) return {};
    if (i > j) return -displacement(j, i);
    return minimum_image(positions_[j] - positions_[i]);
}

void Cluster::write_description(std::ostream& os) const {
    fmt::print(os, "cluster {} {} {}\n", a_, b_, n_sites());
    fmt::print(os, "translation {:.17g} {:.17g} {:.17g} {:.17g}\n", translations_[0].x, translations_[0].y,
               translations_[1].x, translations_[1].y);
    fmt::print(os, "center {}\n", center_site_);
    for (std::size_t s = 0; s < positions_.size(); ++s) {
        fmt::print(os, "site {} {:.17g} {:.17g}\n", s, positions_[s].x, positions_[s].y);
    }
    for (const auto& b : bonds_) {
        fmt::print(os, "bond {} {} {:.17g} {:.17g}\n", b.i, b.j, b.dmi.x, b.dmi.y);
    }
    for (const auto& p : plaquettes_) fmt::print(os, "plaquette {} {} {}\n", p[0], p[1], p[2]);
    for (const auto& q : momenta_) fmt::print(os, "momentum {:.17g} {:.17g}\n", q.x, q.y);
}

Cluster build_cluster(int a, int b) { return Cluster(a, b); }

std::array<Vec2, 2> reciprocal_basis() {
    const double two_pi = 2.0 * std::numbers::pi;
    return {Vec2{two_pi, -two_pi / std::sqrt(3.0)}, Vec2{0.0, 2.0 * two_pi / std::sqrt(3.0)}};
}

Vec2 fold_to_brillouin_zone(Vec2 q) {
    const auto [b1, b2] = reciprocal_basis();
    return shortest_image(q, b1, b2);
}

std::vector<Vec2> momentum_grid(const Cluster& /*c*/, int resolution) {
    if (resolution < 2) throw std::invalid_argument("momentum grid resolution must be >= 2");
    // Hexagonal zone with corners at |K| = 4 pi / 3 along +-x.
    const double qx_max = 4.0 * std::numbers::pi / 3.0;
    const double qy_max = 2.0 * std::numbers::pi / std::sqrt(3.0);
    std::vector<Vec2> grid;
    grid.reserve(static_cast<std::size_t>(resolution) * resolution);
    const double step = 1.0 / static_cast<double>(resolution - 1);
    for (int iy = 0; iy < resolution; ++iy) {
        for (int ix = 0; ix < resolution; ++ix) {
            grid.push_back({-qx_max + 2.0 * qx_max * ix * step, -qy_max + 2.0 * qy_max * iy * step});
        }
    }
    return grid;
}

}  // namespace skyrmion
