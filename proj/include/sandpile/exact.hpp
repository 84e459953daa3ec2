#pragma once

#include "sandpile/model.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace sandpile {

struct RationalMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Rational> data;

    RationalMatrix() = default;
    RationalMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    Rational& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Rational& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool operator==(const RationalMatrix& other) const = default;

    static RationalMatrix identity(std::size_t n);
    Rational row_sum(std::size_t r) const;
};

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b);

/// Solves A X = B exactly by Gaussian elimination over the rationals.
/// Throws SingularMatrix when A is singular.
RationalMatrix solve_linear(RationalMatrix a, RationalMatrix b);

/// Dense indexing of the reachable extended state space: the stable block
/// [1..M_1] x ... x [1..M_N] in lexicographic order, followed by the unstable
/// configurations reachable from stable-plus-one-grain under
/// smallest-unstable-site topplings (breadth-first discovery order).
struct StateIndex {
    std::vector<Config> states;
    std::size_t n_stable = 0;
    std::map<Config, std::size_t> pos;

    std::optional<std::size_t> find(const Config& eta) const;
    bool is_stable_index(std::size_t i) const { return i < n_stable; }
};

/// Which unstable site the extended chain topples at each step. The collapsed
/// chain is rule-independent (abelian property); exposing the alternative
/// allows verifying that.
enum class ToppleRule {
    SmallestUnstable,
    LargestUnstable,
};

/// `add_sites` is the set of sites where grains may be added (the support of
/// mu, or all sites). Throws StateSpaceTooLarge past `cap` states.
StateIndex enumerate_states(const SandpileModel& model, const std::vector<int>& add_sites,
                            std::size_t cap = 200000,
                            ToppleRule rule = ToppleRule::SmallestUnstable);

/// Blocks of the extended one-operation-per-step chain: A (stable->stable),
/// B (stable->transient), C (transient->stable), D (transient->transient).
struct ExtendedBlocks {
    RationalMatrix A, B, C, D;
};

ExtendedBlocks build_extended(const SandpileModel& model, const AdditionDistribution& mu,
                              const StateIndex& index,
                              ToppleRule rule = ToppleRule::SmallestUnstable);

/// Collapses the extended chain onto the stable states: P = A + B (I-D)^-1 C.
/// The solve is verified by back-substitution and every row of P must sum to
/// 1 exactly.
RationalMatrix collapse(const ExtendedBlocks& blocks);

/// Shares one exact absorption solve across all per-site matrices and
/// collapsed chains of a model. The enumeration uses the full site set.
class ExactSolver {
public:
    explicit ExactSolver(SandpileModel model, std::size_t cap = 200000);

    const SandpileModel& model() const { return model_; }
    const StateIndex& index() const { return index_; }

    /// Absorption probabilities X = (I-D)^-1 C: row t is the distribution of
    /// the stable state reached by stabilizing transient state t.
    const RationalMatrix& absorption() const { return absorption_; }

    /// P^(k): row eta is the exact distribution of stabilize(eta + delta^k).
    RationalMatrix per_site_matrix(int k) const;

    /// Collapsed chain for an addition law: sum_k mu(k) P^(k) computed as
    /// A + B X over the shared enumeration.
    RationalMatrix collapse(const AdditionDistribution& mu) const;

    /// Index of the maximal stable state (M_1, ..., M_N).
    std::size_t maximal_state_index() const { return index_.n_stable - 1; }

private:
    SandpileModel model_;
    StateIndex index_;
    RationalMatrix absorption_;
};

struct CommuteReport {
    bool holds = true;
    int site_a = 0, site_b = 0;       // an offending pair when holds is false
    Rational max_abs_difference = 0;  // largest |(P^a P^b - P^b P^a)| entry
};

/// Exact equality of P^(k) P^(l) and P^(l) P^(k) over all site pairs.
CommuteReport commute_check(const SandpileModel& model);

struct ChainDecomposition {
    std::vector<std::vector<std::size_t>> classes; // partition of state indices
    std::vector<bool> recurrent;                   // per class
    std::vector<std::uint64_t> periods;            // per class; 0 for transient classes
    std::vector<std::size_t> class_of;             // state index -> class id
};

/// Strongly connected components of the positive-transition digraph; closed
/// components are recurrent, with period the gcd of their cycle lengths.
ChainDecomposition chain_decomposition(const RationalMatrix& p);

/// Unique exact solution of pi P = pi, pi >= 0, sum pi = 1 supported on the
/// given recurrent class. Throws SingularSystem when the class is not closed
/// or the restricted chain is not irreducible.
std::vector<Rational> stationary(const RationalMatrix& p, const std::vector<std::size_t>& cls);

struct MuIndependenceReport {
    bool holds = true;
    std::vector<std::size_t> recurrent_class;  // stable-state indices, ascending
    std::vector<std::vector<Rational>> pis;    // one per mu, over the class
};

/// Computes the stationary distribution on the recurrent class containing the
/// maximal state for each mu and compares them exactly. Throws
/// RecurrentClassMismatch when the classes differ across the given laws.
MuIndependenceReport mu_independence(const SandpileModel& model,
                                     const std::vector<AdditionDistribution>& mus);

} // namespace sandpile
