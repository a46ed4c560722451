#include "doctest.h"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "skyrmion/lattice.hpp"

using namespace skyrmion;

namespace {

// Number of (ordered site pair, periodic image) combinations at unit
// distance, found by scanning translation images directly.
std::size_t brute_force_neighbour_slots(const Cluster& c) {
    const auto [t1, t2] = c.translation_vectors();
    std::size_t count = 0;
    for (std::size_t i = 0; i < c.n_sites(); ++i) {
        for (std::size_t j = 0; j < c.n_sites(); ++j) {
            for (int m1 = -3; m1 <= 3; ++m1) {
                for (int m2 = -3; m2 <= 3; ++m2) {
                    const Vec2 d = c.positions()[j] + m1 * t1 + m2 * t2 - c.positions()[i];
                    if (std::abs(d.norm() - 1.0) < 1e-9) ++count;
                }
            }
        }
    }
    return count;
}

bool same_modulo_reciprocal(Vec2 p, Vec2 q) {
    return fold_to_brillouin_zone(p - q).norm() < 1e-8;
}

}  // namespace

TEST_CASE("cluster sizes and counts") {
    SUBCASE("19-site cluster") {
        const Cluster c = build_cluster(3, 2);
        CHECK(c.n_sites() == 19);
        CHECK(c.bonds().size() == 57);
        CHECK(c.plaquettes().size() == 19);
        CHECK(brute_force_neighbour_slots(c) == 2 * 57);
    }
    SUBCASE("3-site cluster") {
        const Cluster c = build_cluster(1, 1);
        CHECK(c.n_sites() == 3);
        CHECK(c.bonds().size() == 9);
        CHECK(c.plaquettes().size() == 3);
        CHECK(brute_force_neighbour_slots(c) == 2 * 9);
    }
    SUBCASE("4-site cluster") { CHECK(build_cluster(2, 0).n_sites() == 4); }
    SUBCASE("N = a^2 + ab + b^2") {
        for (int a = 1; a <= 4; ++a) {
            for (int b = 0; b <= 3; ++b) {
                if (a * a + a * b + b * b < 3) continue;
                CHECK(build_cluster(a, b).n_sites() == static_cast<std::size_t>(a * a + a * b + b * b));
            }
        }
    }
}

TEST_CASE("degenerate tilts are rejected") {
    CHECK_THROWS_AS(build_cluster(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(build_cluster(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_cluster(2, -1), std::invalid_argument);
}

TEST_CASE("site 0 sits at the origin") {
    for (auto [a, b] : {std::pair{3, 2}, {1, 1}, {2, 1}, {3, 0}}) {
        const Cluster c = build_cluster(a, b);
        CHECK(c.positions()[0].norm() == doctest::Approx(0.0));
    }
}

TEST_CASE("bond geometry") {
    for (auto [a, b] : {std::pair{3, 2}, {2, 1}, {3, 0}, {1, 1}, {2, 0}, {4, 1}}) {
        const Cluster c = build_cluster(a, b);
        CAPTURE(c.n_sites());
        std::vector<int> incident(c.n_sites(), 0);
        std::vector<Vec2> dmi_sum(c.n_sites());
        for (const auto& bond : c.bonds()) {
            ++incident[bond.i];
            ++incident[bond.j];
            CHECK(bond.dmi.norm() == doctest::Approx(1.0));
            CHECK(bond.dmi.dot(bond.direction) == doctest::Approx(0.0));
            CHECK(bond.direction.norm() == doctest::Approx(1.0));
            // z-hat x e
            CHECK(bond.dmi.x == doctest::Approx(-bond.direction.y));
            CHECK(bond.dmi.y == doctest::Approx(bond.direction.x));
            dmi_sum[bond.i] = dmi_sum[bond.i] + bond.dmi;
            dmi_sum[bond.j] = dmi_sum[bond.j] - bond.dmi;
        }
        for (std::size_t s = 0; s < c.n_sites(); ++s) {
            CHECK(incident[s] == 6);
            CHECK(dmi_sum[s].norm() < 1e-12);
        }
        if (c.n_sites() >= 7) {
            std::set<std::pair<std::size_t, std::size_t>> pairs;
            for (const auto& bond : c.bonds()) {
                CHECK(pairs.insert({std::min(bond.i, bond.j), std::max(bond.i, bond.j)}).second);
                const Vec2 d = c.displacement(bond.i, bond.j);
                CHECK(d.norm() == doctest::Approx(1.0));
                CHECK((d - bond.direction).norm() < 1e-12);
            }
        }
    }
}

TEST_CASE("plaquettes are counter-clockwise up triangles covering each site three times") {
    for (auto [a, b] : {std::pair{3, 2}, {1, 1}, {2, 1}}) {
        const Cluster c = build_cluster(a, b);
        std::vector<int> seen(c.n_sites(), 0);
        std::set<std::array<std::size_t, 3>> distinct;
        for (const auto& p : c.plaquettes()) {
            for (auto s : p) ++seen[s];
            const Vec2 u = c.displacement(p[0], p[1]);
            const Vec2 v = c.displacement(p[0], p[2]);
            if (c.n_sites() >= 7) {
                CHECK(u.cross(v) == doctest::Approx(std::sqrt(3.0) / 2.0));
                CHECK(c.displacement(p[1], p[2]).norm() == doctest::Approx(1.0));
            }
            distinct.insert(p);
        }
        CHECK(distinct.size() == c.n_sites());
        for (int s : seen) CHECK(s == 3);
    }
}

TEST_CASE("displacement") {
    const Cluster c = build_cluster(3, 2);
    for (std::size_t i = 0; i < c.n_sites(); ++i) {
        CHECK(c.displacement(i, i).norm() == 0.0);
        for (std::size_t j = 0; j < c.n_sites(); ++j) {
            const Vec2 dij = c.displacement(i, j);
            const Vec2 dji = c.displacement(j, i);
            CHECK(dij.x == -dji.x);
            CHECK(dij.y == -dji.y);
        }
    }
    CHECK_THROWS_AS(c.displacement(0, 19), std::out_of_range);
    // Antisymmetry also holds where images tie.
    const Cluster small = build_cluster(1, 1);
    CHECK((small.displacement(0, 1) + small.displacement(1, 0)).norm() == 0.0);
}

TEST_CASE("center site of the 19-site cluster") {
    const Cluster c = build_cluster(3, 2);
    CHECK(c.center_site() == 0);
}

TEST_CASE("allowed momenta") {
    for (auto [a, b] : {std::pair{3, 2}, {1, 1}, {2, 0}, {2, 1}}) {
        const Cluster c = build_cluster(a, b);
        const auto& qs = c.allowed_momenta();
        REQUIRE(qs.size() == c.n_sites());
        CHECK(qs[0].norm() == doctest::Approx(0.0));
        for (std::size_t m = 0; m < qs.size(); ++m) {
            for (const Vec2 t : c.translation_vectors()) {
                const double phase = qs[m].dot(t) / (2.0 * std::numbers::pi);
                CHECK(std::abs(phase - std::round(phase)) < 1e-9);
            }
            for (std::size_t n = m + 1; n < qs.size(); ++n) CHECK_FALSE(same_modulo_reciprocal(qs[m], qs[n]));
        }
    }
}

TEST_CASE("momentum grid") {
    const Cluster c = build_cluster(3, 2);
    const auto corners = momentum_grid(c, 2);
    REQUIRE(corners.size() == 4);
    const double qx = 4.0 * std::numbers::pi / 3.0;
    const double qy = 2.0 * std::numbers::pi / std::sqrt(3.0);
    CHECK(corners[0].x == doctest::Approx(-qx));
    CHECK(corners[0].y == doctest::Approx(-qy));
    CHECK(corners[3].x == doctest::Approx(qx));
    CHECK(corners[3].y == doctest::Approx(qy));
    CHECK_THROWS(momentum_grid(c, 1));
    // Every exact cluster momentum lies inside the plotted box.
    for (const Vec2 q : c.allowed_momenta()) {
        CHECK(std::abs(q.x) <= qx + 1e-9);
        CHECK(std::abs(q.y) <= qy + 1e-9);
    }
}

TEST_CASE("text description lists every record") {
    const Cluster c = build_cluster(2, 1);
    std::ostringstream os;
    c.write_description(os);
    std::istringstream is(os.str());
    std::string line;
    int sites = 0, bonds = 0, plaquettes = 0;
    while (std::getline(is, line)) {
        if (line.rfind("site ", 0) == 0) ++sites;
        if (line.rfind("bond ", 0) == 0) ++bonds;
        if (line.rfind("plaquette ", 0) == 0) ++plaquettes;
    }
    CHECK(sites == 7);
    CHECK(bonds == 21);
    CHECK(plaquettes == 7);
}
