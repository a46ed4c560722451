#define EIGEN_DONT_PARALLELIZE
#include "skyrmion/solver.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "skyrmion/errors.hpp"

namespace skyrmion {

namespace {

using Basis = Eigen::MatrixXcd;

std::span<cplx> column(Basis& v, Eigen::Index j) { return {v.col(j).data(), static_cast<std::size_t>(v.rows())}; }

void project_out(const Eigen::MatrixXcd& locked, Eigen::Ref<Eigen::VectorXcd> w) {
    if (locked.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd c = locked.adjoint() * w;
        w.noalias() -= locked * c;
    }
}

// Classical Gram-Schmidt against the first `count` columns, repeated once
// when the first pass removes most of the norm. Returns the accumulated
// projection coefficients.
Eigen::VectorXcd orthogonalize(const Basis& v, Eigen::Index count, Eigen::Ref<Eigen::VectorXcd> w) {
    Eigen::VectorXcd h = Eigen::VectorXcd::Zero(count);
    if (count == 0) return h;
    double before = w.norm();
    for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXcd c = v.leftCols(count).adjoint() * w;
        w.noalias() -= v.leftCols(count) * c;
        h += c;
        const double after = w.norm();
        if (after > 0.7071 * before) break;
        before = after;
    }
    return h;
}

// v[:, 0:keep] <- v[:, 0:used] * y[:, 0:keep], processed in row blocks so the
// rotation needs no second full-size basis.
void rotate_basis(Basis& v, Eigen::Index used, const Eigen::MatrixXd& y, Eigen::Index keep) {
    const Eigen::MatrixXcd yc = y.leftCols(keep).cast<cplx>();
    constexpr Eigen::Index kBlock = 2048;
    for (Eigen::Index r = 0; r < v.rows(); r += kBlock) {
        const Eigen::Index rows = std::min(kBlock, v.rows() - r);
        const Eigen::MatrixXcd block = v.block(r, 0, rows, used) * yc;
        v.block(r, 0, rows, keep) = block;
    }
}

void fill_degeneracy_flags(EigenResult& r, double tol) {
    const std::size_t n = r.energies.size();
    r.degeneracy_flags.assign(n, false);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (r.energies[i + 1] - r.energies[i] < tol) {
            r.degeneracy_flags[i] = true;
            r.degeneracy_flags[i + 1] = true;
        }
    }
}

}  // namespace

double EigenResult::max_residual() const {
    double m = 0.0;
    for (double r : residuals) m = std::max(m, r);
    return m;
}

void EigenResult::require_converged(const char* what) const {
    if (!converged) {
        throw PhysicsError(fmt::format("{}: eigensolver did not converge after {} matvecs (best residual {:.3e})", what,
                                       matvecs, max_residual()));
    }
}

namespace {

// One thick-restart Lanczos run for the `want` lowest eigenpairs of op
// restricted to the orthogonal complement of `locked`.
EigenResult restarted_lanczos(const RawOperator& op, std::size_t n_sites, Eigen::Index want,
                              const Eigen::MatrixXcd& locked, const SolverOptions& opts, std::size_t budget,
                              std::uint64_t& seed) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_sites);
    const Eigen::Index free_dim = dim - locked.cols();
    Eigen::Index m = opts.basis_size != 0 ? static_cast<Eigen::Index>(opts.basis_size)
                                          : std::max<Eigen::Index>(2 * want, want + 24);
    m = std::min(std::max(m, want + 1), free_dim);

    Basis v(dim, m + 1);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXcd w(dim);
    auto random_column = [&](Eigen::Index j) {
        const StateVector r = StateVector::random(n_sites, seed++);
        Eigen::VectorXcd x = Eigen::Map<const Eigen::VectorXcd>(r.amplitudes().data(), dim);
        project_out(locked, x);
        orthogonalize(v, j, x);
        v.col(j) = x / x.norm();
    };
    random_column(0);

    EigenResult result;
    Eigen::Index kept = 0;
    while (true) {
        double beta = 0.0;
        Eigen::Index used = m;
        for (Eigen::Index j = kept; j < m; ++j) {
            op(column(v, j), std::span<cplx>(w.data(), static_cast<std::size_t>(dim)));
            ++result.matvecs;
            project_out(locked, w);
            const Eigen::VectorXcd h = orthogonalize(v, j + 1, w);
            for (Eigen::Index i = 0; i <= j; ++i) t(i, j) = t(j, i) = h(i).real();
            beta = w.norm();
            if (j + 1 == free_dim) {
                // The basis spans the whole free space.
                beta = 0.0;
                used = j + 1;
                break;
            }
            if (beta <= 1e-12 * std::max(1.0, h.norm())) {
                // Invariant subspace: continue in a fresh direction.
                beta = 0.0;
                random_column(j + 1);
            } else {
                v.col(j + 1) = w / beta;
            }
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.topLeftCorner(used, used));
        const Eigen::VectorXd& theta = es.eigenvalues();
        const Eigen::MatrixXd& y = es.eigenvectors();
        const Eigen::Index target = std::min(want, used);
        double worst_estimate = 0.0;
        for (Eigen::Index i = 0; i < target; ++i) {
            worst_estimate = std::max(worst_estimate, beta * std::abs(y(used - 1, i)));
        }
        const bool whole_space = used == free_dim;
        const bool out_of_budget = result.matvecs >= budget;

        if (worst_estimate <= opts.residual_tol || whole_space || out_of_budget) {
            // Form Ritz vectors and check residuals explicitly.
            const Eigen::MatrixXcd x = v.leftCols(used) * y.leftCols(target).cast<cplx>();
            EigenResult candidate;
            candidate.matvecs = result.matvecs;
            Eigen::VectorXcd hx(dim);
            for (Eigen::Index i = 0; i < target; ++i) {
                op(std::span<const cplx>(x.col(i).data(), static_cast<std::size_t>(dim)),
                   std::span<cplx>(hx.data(), static_cast<std::size_t>(dim)));
                ++candidate.matvecs;
                candidate.energies.push_back(theta(i));
                candidate.residuals.push_back((hx - theta(i) * x.col(i)).norm());
                candidate.states.emplace_back(n_sites, std::vector<cplx>(x.col(i).data(), x.col(i).data() + dim));
            }
            if (used > target) candidate.next_energy = theta(target);
            result.matvecs = candidate.matvecs;
            candidate.converged = candidate.max_residual() <= opts.residual_tol;
            if (candidate.converged || whole_space || out_of_budget) return candidate;
        }

        // Thick restart: keep the lowest Ritz vectors plus the residual direction.
        const Eigen::Index keep = std::min(want + (used - want) / 2, used - 1);
        rotate_basis(v, used, y, keep);
        v.col(keep) = v.col(used);
        t.setZero();
        for (Eigen::Index i = 0; i < keep; ++i) t(i, i) = theta(i);
        kept = keep;
    }
}

Eigen::MatrixXcd as_columns(const std::vector<StateVector>& states, Eigen::Index dim) {
    Eigen::MatrixXcd x(dim, static_cast<Eigen::Index>(states.size()));
    for (std::size_t i = 0; i < states.size(); ++i) {
        x.col(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::VectorXcd>(states[i].amplitudes().data(), dim);
    }
    return x;
}

// Appends `extra` to `base` and keeps the `limit` lowest levels.
void merge_lowest(EigenResult& base, EigenResult&& extra, std::size_t limit) {
    std::vector<std::size_t> order;
    const std::size_t total = base.energies.size() + extra.energies.size();
    for (std::size_t i = 0; i < total; ++i) order.push_back(i);
    auto energy = [&](std::size_t i) {
        return i < base.energies.size() ? base.energies[i] : extra.energies[i - base.energies.size()];
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energy(a) < energy(b); });
    order.resize(std::min(limit, total));
    EigenResult merged;
    for (std::size_t i : order) {
        EigenResult& src = i < base.energies.size() ? base : extra;
        const std::size_t k = i < base.energies.size() ? i : i - base.energies.size();
        merged.energies.push_back(src.energies[k]);
        merged.residuals.push_back(src.residuals[k]);
        merged.states.push_back(std::move(src.states[k]));
    }
    merged.matvecs = base.matvecs + extra.matvecs;
    merged.converged = base.converged && extra.converged;
    base = std::move(merged);
}

}  // namespace

EigenResult lowest_eigenpairs(const RawOperator& op, std::size_t n_sites, std::size_t nev, const SolverOptions& opts) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_sites);
    if (nev == 0 || static_cast<Eigen::Index>(nev) > dim) {
        throw std::invalid_argument(fmt::format("requested {} eigenpairs in a space of dimension {}", nev, dim));
    }
    if (!(opts.residual_tol > 0.0)) throw std::invalid_argument("residual tolerance must be positive");
    std::uint64_t seed = opts.seed;
    EigenResult result =
        restarted_lanczos(op, n_sites, static_cast<Eigen::Index>(nev), Eigen::MatrixXcd(dim, 0), opts, opts.max_matvecs, seed);

    // A single start vector sees one copy of each degenerate level. Search the
    // complement of the converged vectors until it holds nothing lower than
    // the highest level kept.
    while (nev > 1 && result.converged && result.matvecs < opts.max_matvecs) {
        const Eigen::MatrixXcd locked = as_columns(result.states, dim);
        const Eigen::Index free_dim = dim - locked.cols();
        if (free_dim == 0) break;
        EigenResult extra =
            restarted_lanczos(op, n_sites, std::min<Eigen::Index>(static_cast<Eigen::Index>(nev), free_dim), locked,
                              opts, opts.max_matvecs - result.matvecs, seed);
        const double top = result.energies.back();
        const bool found_lower = !extra.energies.empty() && extra.energies.front() < top - opts.degeneracy_tol;
        if (!extra.converged) {
            result.matvecs += extra.matvecs;
            result.converged = false;
            break;
        }
        merge_lowest(result, std::move(extra), nev);
        if (!found_lower) break;
    }
    result.next_energy.reset();
    fill_degeneracy_flags(result, opts.degeneracy_tol);
    return result;
}

EigenResult ground_state(const Hamiltonian& h, double residual_tol, SolverOptions opts) {
    if (!(residual_tol > 0.0)) throw std::invalid_argument("residual tolerance must be positive");
    opts.residual_tol = residual_tol;
    const RawOperator op = [&h](std::span<const cplx> in, std::span<cplx> out) { h.apply_shifted(in, out, 0.0, 1.0); };
    const auto dim = static_cast<Eigen::Index>(h.dim());
    std::uint64_t seed = opts.seed;
    EigenResult r = restarted_lanczos(op, h.n_sites(), 1, Eigen::MatrixXcd(dim, 0), opts, opts.max_matvecs, seed);
    r.next_energy.reset();
    if (r.converged && dim > 1 && r.matvecs < opts.max_matvecs) {
        // Lowest level orthogonal to the ground state decides degeneracy.
        EigenResult next = restarted_lanczos(op, h.n_sites(), 1, as_columns(r.states, dim), opts,
                                             opts.max_matvecs - r.matvecs, seed);
        r.matvecs += next.matvecs;
        if (!next.converged) {
            r.converged = false;
        } else if (next.energies[0] < r.energies[0]) {
            std::swap(r.energies[0], next.energies[0]);
            std::swap(r.states[0], next.states[0]);
            std::swap(r.residuals[0], next.residuals[0]);
        }
        if (next.converged) r.next_energy = next.energies[0];
    }
    r.degeneracy_flags.assign(1, r.next_energy && *r.next_energy - r.energies[0] < opts.degeneracy_tol);
    return r;
}

SpectralBounds extremal_eigenvalues(const Hamiltonian& h, double tol, SolverOptions opts) {
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    opts.residual_tol = tol;
    const EigenResult low = lowest_eigenpairs(
        [&h](std::span<const cplx> in, std::span<cplx> out) { h.apply_shifted(in, out, 0.0, 1.0); }, h.n_sites(), 1,
        opts);
    low.require_converged("lowest eigenvalue");
    const EigenResult high = lowest_eigenpairs(
        [&h](std::span<const cplx> in, std::span<cplx> out) { h.apply_shifted(in, out, 0.0, -1.0); }, h.n_sites(), 1,
        opts);
    high.require_converged("highest eigenvalue");
    const double e_min = low.energies[0];
    const double e_max = -high.energies[0];
    const double margin = 1e-6 * (e_max - e_min);
    return {e_min - margin, e_max + margin};
}

EigenResult low_spectrum(const Hamiltonian& h, std::size_t k, double residual_tol, SolverOptions opts) {
    if (k == 0) throw std::invalid_argument("low_spectrum needs k >= 1");
    if (k > opts.max_states) {
        throw std::length_error(fmt::format("low_spectrum: k = {} exceeds the capacity of {} stored states", k,
                                            opts.max_states));
    }
    opts.residual_tol = residual_tol;
    return lowest_eigenpairs(
        [&h](std::span<const cplx> in, std::span<cplx> out) { h.apply_shifted(in, out, 0.0, 1.0); }, h.n_sites(), k,
        opts);
}

void write_spectrum_csv(std::ostream& os, const EigenResult& r) {
    fmt::print(os, "index,energy,residual,degenerate_flag\n");
    for (std::size_t i = 0; i < r.energies.size(); ++i) {
        fmt::print(os, "{},{:.17g},{:.17g},{}\n", i, r.energies[i], r.residuals[i], r.degeneracy_flags[i] ? 1 : 0);
    }
}

}  // namespace skyrmion
