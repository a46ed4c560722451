#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace skyrmion {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr double dot(Vec2 o) const { return x * o.x + y * o.y; }
    constexpr double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

// Primitive vectors of the triangular lattice, lattice constant 1.
inline const Vec2 kA1{1.0, 0.0};
inline const Vec2 kA2{0.5, 0.8660254037844386};

/// A nearest-neighbour bond. `dmi` is the unit in-plane DMI direction for the
/// ordered pair (i, j); the bond from j to i carries -dmi.
struct Bond {
    std::size_t i = 0;
    std::size_t j = 0;
    Vec2 direction;  // unit lattice vector pointing from i to j
    Vec2 dmi;        // z-hat x direction
};

/// Counter-clockwise elementary "up" triangle.
using Plaquette = std::array<std::size_t, 3>;

/// Periodic triangular cluster spanned by the tilted translation vectors
///   T1 = a*a1 + b*a2,  T2 = -b*a1 + (a+b)*a2,
/// holding N = a^2 + ab + b^2 sites.
///
/// Every site carries six bond slots (three bonds it owns, three pointing
/// at it), so there are always 3N bonds. On clusters with N >= 7 each
/// unordered pair of sites appears at most once; on N = 3 and N = 4 the same
/// pair is connected through several periodic images and each image is kept
/// as its own bond with its own DMI vector.
class Cluster {
  public:
    Cluster(int a, int b);

    std::size_t n_sites() const { return positions_.size(); }
    std::array<int, 2> tilt() const { return {a_, b_}; }
    const std::vector<Vec2>& positions() const { return positions_; }
    const std::vector<Bond>& bonds() const { return bonds_; }
    const std::vector<Plaquette>& plaquettes() const { return plaquettes_; }
    std::size_t center_site() const { return center_site_; }
    const std::array<Vec2, 2>& translation_vectors() const { return translations_; }
    const std::vector<Vec2>& allowed_momenta() const { return momenta_; }

    /// Minimum-image displacement r_j - r_i. Ties between equally short
    /// images are broken by a fixed image enumeration order, antisymmetrically.
    Vec2 displacement(std::size_t i, std::size_t j) const;

    /// Reduces a lattice point given in (a1, a2) integer coordinates to its site index.
    std::size_t site_at(long n1, long n2) const;

    /// Plain-text dump: one record per line, space-separated fields.
    void write_description(std::ostream& os) const;

  private:
    std::array<long, 2> reduce(long n1, long n2) const;
    Vec2 minimum_image(Vec2 d) const;

    int a_;
    int b_;
    std::vector<std::array<long, 2>> coords_;
    std::vector<Vec2> positions_;
    std::vector<Bond> bonds_;
    std::vector<Plaquette> plaquettes_;
    std::size_t center_site_ = 0;
    std::array<Vec2, 2> translations_;
    std::vector<Vec2> momenta_;
};

Cluster build_cluster(int a, int b);

/// Reciprocal basis (b1, b2) of the triangular lattice, b_i . a_j = 2 pi delta_ij.
std::array<Vec2, 2> reciprocal_basis();

/// Folds a wave vector into the first Brillouin zone of the triangular lattice.
Vec2 fold_to_brillouin_zone(Vec2 q);

/// resolution x resolution uniform grid over the bounding box of the first
/// Brillouin zone, row-major with qy outer and qx inner.
std::vector<Vec2> momentum_grid(const Cluster& c, int resolution);

}  // namespace skyrmion
