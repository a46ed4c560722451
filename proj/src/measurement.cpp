#include "skyrmion/measurement.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "skyrmion/errors.hpp"
#include "skyrmion/observables.hpp"
#include "skyrmion/parallel.hpp"
#include "skyrmion/propagator.hpp"

namespace skyrmion {

namespace {

void check_site(const StateVector& psi, std::size_t site) {
    if (site >= psi.n_sites()) {
        throw std::out_of_range(fmt::format("site {} outside a {}-site state", site, psi.n_sites()));
    }
}

}  // namespace

std::pair<double, double> outcome_probabilities(const StateVector& psi, std::size_t site) {
    check_site(psi, site);
    const auto amps = psi.amplitudes();
    const std::uint64_t bit = std::uint64_t{1} << site;
    const double up = parallel::chunked_sum<double>(psi.dim(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t k = b; k < e; ++k) {
            if (k & bit) acc += std::norm(amps[k]);
        }
        return acc;
    });
    const double down = parallel::chunked_sum<double>(psi.dim(), [&](std::size_t b, std::size_t e) {
        double acc = 0.0;
        for (std::size_t k = b; k < e; ++k) {
            if (!(k & bit)) acc += std::norm(amps[k]);
        }
        return acc;
    });
    return {down, up};
}

std::optional<Projection> project(const StateVector& psi, std::size_t site, Outcome outcome) {
    const auto [down, up] = outcome_probabilities(psi, site);
    const double kept = outcome == Outcome::up ? up : down;
    const double removed = outcome == Outcome::up ? down : up;
    if (kept < kZeroProbability) return std::nullopt;
    if (removed == 0.0) return Projection{psi, 1.0};

    StateVector out = psi;
    const std::uint64_t bit = std::uint64_t{1} << site;
    const bool want_up = outcome == Outcome::up;
    auto amps = out.amplitudes();
    parallel::for_chunks(out.dim(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            if (((k & bit) != 0) != want_up) amps[k] = 0.0;
        }
    });
    out *= cplx{1.0 / std::sqrt(kept), 0.0};
    return Projection{std::move(out), kept};
}

std::string Branch::label() const {
    std::string s;
    for (Outcome o : outcomes) s += o == Outcome::up ? 'u' : 'd';
    return s;
}

BranchEnsemble BranchEnsemble::from_state(const StateVector& psi, std::size_t site) {
    check_site(psi, site);
    BranchEnsemble e;
    e.site = site;
    e.branches.push_back(Branch{{}, 1.0, psi, psi});
    return e;
}

double BranchEnsemble::total_probability() const {
    double sum = 0.0;
    for (const auto& b : branches) sum += b.probability;
    return sum;
}

BranchEnsemble measure(const BranchEnsemble& e, std::size_t site) {
    BranchEnsemble out;
    out.site = site;
    double dropped = 0.0;
    for (const Branch& parent : e.branches) {
        for (Outcome o : {Outcome::up, Outcome::down}) {
            auto proj = project(parent.state, site, o);
            if (!proj) {
                const auto [down, up] = outcome_probabilities(parent.state, site);
                dropped += parent.probability * (o == Outcome::up ? up : down);
                continue;
            }
            Branch child;
            child.outcomes = parent.outcomes;
            child.outcomes.push_back(o);
            child.probability = parent.probability * proj->probability;
            child.anchor_state = proj->state;
            child.state = std::move(proj->state);
            out.branches.push_back(std::move(child));
        }
    }
    if (dropped > 1e-10) {
        throw PhysicsError(fmt::format("measurement pruned probability {:.3e} above 1e-10", dropped));
    }
    const double total = out.total_probability();
    if (std::abs(total - 1.0) > 1e-10) {
        throw PhysicsError(fmt::format("branch probabilities sum to {:.15f} after measurement", total));
    }
    return out;
}

void evolve_ensemble_in_place(BranchEnsemble& e, const ChebyshevPropagator& p, double t) {
    for (Branch& b : e.branches) p.evolve_in_place(b.state, t);
}

BranchEnsemble evolve_ensemble(const BranchEnsemble& e, const ChebyshevPropagator& p, double t) {
    BranchEnsemble out = e;
    evolve_ensemble_in_place(out, p, t);
    return out;
}

double ensemble_expectation(const BranchEnsemble& e, const OperatorApply& op) {
    double sum = 0.0;
    for (const Branch& b : e.branches) sum += b.probability * expectation(op, b.state);
    return sum;
}

void write_branch_csv(std::ostream& os, const BranchEnsemble& e, const Hamiltonian& h) {
    fmt::print(os, "outcome_sequence,probability,energy,chirality\n");
    const OperatorApply hop = h.as_operator();
    for (const Branch& b : e.branches) {
        fmt::print(os, "{},{:.17g},{:.17g},{:.17g}\n", b.label(), b.probability, expectation(hop, b.state),
                   chirality(h.cluster(), b.state));
    }
}

}  // namespace skyrmion
