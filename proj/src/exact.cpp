#include "sandpile/exact.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace sandpile {

RationalMatrix RationalMatrix::identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1;
    }
    return m;
}

Rational RationalMatrix::row_sum(std::size_t r) const {
    Rational s = 0;
    for (std::size_t c = 0; c < cols; ++c) {
        s += (*this)(r, c);
    }
    return s;
}

RationalMatrix multiply(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.cols != b.rows) {
        throw DimensionMismatch("matrix product shape mismatch");
    }
    RationalMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const Rational& aik = a(i, k);
            if (aik == 0) {
                continue;
            }
            for (std::size_t j = 0; j < b.cols; ++j) {
                if (b(k, j) != 0) {
                    out(i, j) += aik * b(k, j);
                }
            }
        }
    }
    return out;
}

RationalMatrix solve_linear(RationalMatrix a, RationalMatrix b) {
    if (a.rows != a.cols || a.rows != b.rows) {
        throw DimensionMismatch("solve_linear shape mismatch");
    }
    const std::size_t n = a.rows;
    // Gaussian elimination with partial (first-nonzero) pivoting; exact, so
    // any nonzero pivot is as good as another.
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && a(pivot, col) == 0) {
            ++pivot;
        }
        if (pivot == n) {
            throw SingularMatrix("singular system at column " + std::to_string(col));
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(col, j), a(pivot, j));
            }
            for (std::size_t j = 0; j < b.cols; ++j) {
                std::swap(b(col, j), b(pivot, j));
            }
        }
        Rational inv = a(col, col);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a(r, col) == 0) {
                continue;
            }
            Rational f = a(r, col) / inv;
            for (std::size_t j = col; j < n; ++j) {
                a(r, j) -= f * a(col, j);
            }
            for (std::size_t j = 0; j < b.cols; ++j) {
                b(r, j) -= f * b(col, j);
            }
        }
    }
    RationalMatrix x(n, b.cols);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < b.cols; ++j) {
            x(i, j) = b(i, j) / a(i, i);
        }
    }
    return x;
}

std::optional<std::size_t> StateIndex::find(const Config& eta) const {
    auto it = pos.find(eta);
    if (it == pos.end()) {
        return std::nullopt;
    }
    return it->second;
}

namespace {

int pick_unstable(const SandpileModel& model, const Config& eta, ToppleRule rule) {
    int found = 0;
    for (int v = 1; v <= model.n_sites; ++v) {
        if (eta[static_cast<std::size_t>(v - 1)] > model.thresholds[static_cast<std::size_t>(v - 1)]) {
            if (rule == ToppleRule::SmallestUnstable) {
                return v;
            }
            found = v;
        }
    }
    return found;
}

} // namespace

StateIndex enumerate_states(const SandpileModel& model, const std::vector<int>& add_sites,
                            std::size_t cap, ToppleRule rule) {
    StateIndex index;

    // Stable block: [1..M_1] x ... x [1..M_N] in lexicographic order.
    Config eta(static_cast<std::size_t>(model.n_sites), 1);
    while (true) {
        if (index.states.size() >= cap) {
            throw StateSpaceTooLarge("stable state space exceeds cap of " + std::to_string(cap));
        }
        index.pos.emplace(eta, index.states.size());
        index.states.push_back(eta);
        int v = model.n_sites;
        while (v >= 1 && eta[static_cast<std::size_t>(v - 1)] ==
                             model.thresholds[static_cast<std::size_t>(v - 1)]) {
            eta[static_cast<std::size_t>(v - 1)] = 1;
            --v;
        }
        if (v < 1) {
            break;
        }
        eta[static_cast<std::size_t>(v - 1)] += 1;
        if (model.n_sites == 0) {
            break;
        }
    }
    index.n_stable = index.states.size();

    // Transient block: breadth-first closure of stable-plus-one-grain under
    // topplings of the smallest unstable site.
    std::deque<Config> frontier;
    auto discover = [&](const Config& c) {
        if (is_stable(model, c) || index.pos.count(c) != 0) {
            return;
        }
        if (index.states.size() >= cap) {
            throw StateSpaceTooLarge("reachable state space exceeds cap of " +
                                     std::to_string(cap));
        }
        index.pos.emplace(c, index.states.size());
        index.states.push_back(c);
        frontier.push_back(c);
    };

    for (std::size_t i = 0; i < index.n_stable; ++i) {
        for (int k : add_sites) {
            discover(add_grain(index.states[i], k));
        }
    }
    while (!frontier.empty()) {
        Config cur = std::move(frontier.front());
        frontier.pop_front();
        int k = pick_unstable(model, cur, rule);
        for (const auto& [vec, prob] : model.topplings[static_cast<std::size_t>(k - 1)].support) {
            Config next = cur;
            for (std::size_t i = 0; i < next.size(); ++i) {
                next[i] += vec.delta[i];
            }
            discover(next);
        }
    }
    return index;
}

ExtendedBlocks build_extended(const SandpileModel& model, const AdditionDistribution& mu,
                              const StateIndex& index, ToppleRule rule) {
    const std::size_t ns = index.n_stable;
    const std::size_t nt = index.states.size() - ns;
    ExtendedBlocks blocks{RationalMatrix(ns, ns), RationalMatrix(ns, nt), RationalMatrix(nt, ns),
                          RationalMatrix(nt, nt)};

    auto place = [&](std::size_t row, bool from_stable, const Config& target, const Rational& p) {
        auto t = index.find(target);
        if (!t) {
            throw StateSpaceTooLarge("target state missing from enumeration; enumerate with a "
                                     "site set covering supp(mu)");
        }
        if (from_stable) {
            if (*t < ns) {
                blocks.A(row, *t) += p;
            } else {
                blocks.B(row, *t - ns) += p;
            }
        } else {
            if (*t < ns) {
                blocks.C(row, *t) += p;
            } else {
                blocks.D(row, *t - ns) += p;
            }
        }
    };

    for (std::size_t i = 0; i < ns; ++i) {
        for (int k = 1; k <= model.n_sites; ++k) {
            const Rational& w = mu.weights[static_cast<std::size_t>(k - 1)];
            if (w != 0) {
                place(i, true, add_grain(index.states[i], k), w);
            }
        }
    }
    for (std::size_t i = 0; i < nt; ++i) {
        const Config& cur = index.states[ns + i];
        int k = pick_unstable(model, cur, rule);
        for (const auto& [vec, prob] : model.topplings[static_cast<std::size_t>(k - 1)].support) {
            Config next = cur;
            for (std::size_t j = 0; j < next.size(); ++j) {
                next[j] += vec.delta[j];
            }
            place(i, false, next, prob);
        }
    }

    for (std::size_t i = 0; i < ns; ++i) {
        if (blocks.A.row_sum(i) + blocks.B.row_sum(i) != 1) {
            throw SingularSystem("extended row " + std::to_string(i) + " does not sum to 1");
        }
    }
    for (std::size_t i = 0; i < nt; ++i) {
        if (blocks.C.row_sum(i) + blocks.D.row_sum(i) != 1) {
            throw SingularSystem("extended transient row " + std::to_string(i) +
                                 " does not sum to 1");
        }
    }
    return blocks;
}

namespace {

// X = (I - D)^-1 C, verified by exact back-substitution.
RationalMatrix absorption_solve(const RationalMatrix& c, const RationalMatrix& d) {
    const std::size_t nt = d.rows;
    RationalMatrix lhs = RationalMatrix::identity(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            lhs(i, j) -= d(i, j);
        }
    }
    RationalMatrix x = solve_linear(lhs, c);
    // (I - D) X must reproduce C exactly.
    RationalMatrix check = multiply(lhs, x);
    if (!(check == c)) {
        throw SingularMatrix("absorption solve failed back-substitution");
    }
    return x;
}

} // namespace

RationalMatrix collapse(const ExtendedBlocks& blocks) {
    RationalMatrix p = blocks.A;
    if (blocks.D.rows > 0) {
        RationalMatrix bx = multiply(blocks.B, absorption_solve(blocks.C, blocks.D));
        for (std::size_t i = 0; i < p.rows; ++i) {
            for (std::size_t j = 0; j < p.cols; ++j) {
                p(i, j) += bx(i, j);
            }
        }
    }
    for (std::size_t i = 0; i < p.rows; ++i) {
        if (p.row_sum(i) != 1) {
            throw SingularMatrix("collapsed row " + std::to_string(i) + " does not sum to 1");
        }
    }
    return p;
}

ExactSolver::ExactSolver(SandpileModel model, std::size_t cap) : model_(std::move(model)) {
    auto report = dissipativity(model_);
    if (!report.satisfied) {
        throw SingularMatrix("model is not dissipative; exact chain analysis undefined");
    }
    std::vector<int> all_sites(static_cast<std::size_t>(model_.n_sites));
    std::iota(all_sites.begin(), all_sites.end(), 1);
    index_ = enumerate_states(model_, all_sites, cap);

    const std::size_t ns = index_.n_stable;
    const std::size_t nt = index_.states.size() - ns;
    RationalMatrix c(nt, ns), d(nt, nt);
    for (std::size_t i = 0; i < nt; ++i) {
        const Config& cur = index_.states[ns + i];
        int k = pick_unstable(model_, cur, ToppleRule::SmallestUnstable);
        for (const auto& [vec, prob] : model_.topplings[static_cast<std::size_t>(k - 1)].support) {
            Config next = cur;
            for (std::size_t j = 0; j < next.size(); ++j) {
                next[j] += vec.delta[j];
            }
            auto t = index_.find(next);
            if (!t) {
                throw StateSpaceTooLarge("toppling target missing from enumeration");
            }
            if (*t < ns) {
                c(i, *t) += prob;
            } else {
                d(i, *t - ns) += prob;
            }
        }
    }
    absorption_ = nt > 0 ? absorption_solve(c, d) : RationalMatrix(0, ns);
}

RationalMatrix ExactSolver::per_site_matrix(int k) const {
    const std::size_t ns = index_.n_stable;
    RationalMatrix p(ns, ns);
    for (std::size_t i = 0; i < ns; ++i) {
        Config target = add_grain(index_.states[i], k);
        auto t = index_.find(target);
        if (!t) {
            throw StateSpaceTooLarge("state missing from enumeration");
        }
        if (*t < ns) {
            p(i, *t) = 1;
        } else {
            for (std::size_t j = 0; j < ns; ++j) {
                p(i, j) = absorption_(*t - ns, j);
            }
        }
    }
    return p;
}

RationalMatrix ExactSolver::collapse(const AdditionDistribution& mu) const {
    if (mu.weights.size() != static_cast<std::size_t>(model_.n_sites)) {
        throw DimensionMismatch("mu length does not match model");
    }
    const std::size_t ns = index_.n_stable;
    RationalMatrix p(ns, ns);
    for (int k = 1; k <= model_.n_sites; ++k) {
        const Rational& w = mu.weights[static_cast<std::size_t>(k - 1)];
        if (w == 0) {
            continue;
        }
        RationalMatrix pk = per_site_matrix(k);
        for (std::size_t i = 0; i < ns; ++i) {
            for (std::size_t j = 0; j < ns; ++j) {
                if (pk(i, j) != 0) {
                    p(i, j) += w * pk(i, j);
                }
            }
        }
    }
    for (std::size_t i = 0; i < ns; ++i) {
        if (p.row_sum(i) != 1) {
            throw SingularMatrix("collapsed row does not sum to 1");
        }
    }
    return p;
}

CommuteReport commute_check(const SandpileModel& model) {
    ExactSolver solver(model);
    CommuteReport report;
    std::vector<RationalMatrix> per_site;
    per_site.reserve(static_cast<std::size_t>(model.n_sites));
    for (int k = 1; k <= model.n_sites; ++k) {
        per_site.push_back(solver.per_site_matrix(k));
    }
    for (int k = 1; k <= model.n_sites; ++k) {
        for (int l = k + 1; l <= model.n_sites; ++l) {
            RationalMatrix kl = multiply(per_site[static_cast<std::size_t>(k - 1)],
                                         per_site[static_cast<std::size_t>(l - 1)]);
            RationalMatrix lk = multiply(per_site[static_cast<std::size_t>(l - 1)],
                                         per_site[static_cast<std::size_t>(k - 1)]);
            for (std::size_t i = 0; i < kl.rows; ++i) {
                for (std::size_t j = 0; j < kl.cols; ++j) {
                    Rational diff = kl(i, j) - lk(i, j);
                    if (diff < 0) {
                        diff = -diff;
                    }
                    if (diff > report.max_abs_difference) {
                        report.max_abs_difference = diff;
                        report.site_a = k;
                        report.site_b = l;
                        report.holds = false;
                    }
                }
            }
        }
    }
    return report;
}

ChainDecomposition chain_decomposition(const RationalMatrix& p) {
    const std::size_t n = p.rows;
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (p(i, j) > 0) {
                adj[i].push_back(j);
            }
        }
    }

    // Tarjan SCC, iterative.
    ChainDecomposition out;
    out.class_of.assign(n, static_cast<std::size_t>(-1));
    std::vector<std::size_t> idx(n, static_cast<std::size_t>(-1)), low(n);
    std::vector<bool> on_stack(n, false);
    std::vector<std::size_t> stack;
    std::size_t counter = 0;

    struct Frame {
        std::size_t v;
        std::size_t child;
    };
    for (std::size_t start = 0; start < n; ++start) {
        if (idx[start] != static_cast<std::size_t>(-1)) {
            continue;
        }
        std::vector<Frame> frames{{start, 0}};
        idx[start] = low[start] = counter++;
        stack.push_back(start);
        on_stack[start] = true;
        while (!frames.empty()) {
            auto& f = frames.back();
            if (f.child < adj[f.v].size()) {
                std::size_t w = adj[f.v][f.child++];
                if (idx[w] == static_cast<std::size_t>(-1)) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = true;
                    frames.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], idx[w]);
                }
            } else {
                if (low[f.v] == idx[f.v]) {
                    std::vector<std::size_t> cls;
                    while (true) {
                        std::size_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        out.class_of[w] = out.classes.size();
                        cls.push_back(w);
                        if (w == f.v) {
                            break;
                        }
                    }
                    std::sort(cls.begin(), cls.end());
                    out.classes.push_back(std::move(cls));
                }
                std::size_t v = f.v;
                frames.pop_back();
                if (!frames.empty()) {
                    low[frames.back().v] = std::min(low[frames.back().v], low[v]);
                }
            }
        }
    }

    // A class is recurrent iff no transition leaves it.
    out.recurrent.assign(out.classes.size(), true);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j : adj[i]) {
            if (out.class_of[i] != out.class_of[j]) {
                out.recurrent[out.class_of[i]] = false;
            }
        }
    }

    // Period of a recurrent class: gcd of level(u) + 1 - level(v) over its
    // internal edges, with levels from a breadth-first labeling.
    out.periods.assign(out.classes.size(), 0);
    for (std::size_t c = 0; c < out.classes.size(); ++c) {
        if (!out.recurrent[c]) {
            continue;
        }
        const auto& cls = out.classes[c];
        std::map<std::size_t, std::int64_t> level;
        std::deque<std::size_t> queue{cls.front()};
        level[cls.front()] = 0;
        std::int64_t g = 0;
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            for (std::size_t w : adj[u]) {
                if (out.class_of[w] != c) {
                    continue;
                }
                auto it = level.find(w);
                if (it == level.end()) {
                    level[w] = level[u] + 1;
                    queue.push_back(w);
                } else {
                    g = std::gcd(g, std::abs(level[u] + 1 - it->second));
                }
            }
        }
        out.periods[c] = g == 0 ? 1 : static_cast<std::uint64_t>(g);
    }
    return out;
}

std::vector<Rational> stationary(const RationalMatrix& p, const std::vector<std::size_t>& cls) {
    const std::size_t m = cls.size();
    if (m == 0) {
        throw SingularSystem("empty class");
    }
    // Closure check: rows of the class must keep all mass inside it.
    std::map<std::size_t, std::size_t> local;
    for (std::size_t i = 0; i < m; ++i) {
        local[cls[i]] = i;
    }
    RationalMatrix q(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        Rational inside = 0;
        for (std::size_t j = 0; j < m; ++j) {
            q(i, j) = p(cls[i], cls[j]);
            inside += q(i, j);
        }
        if (inside != 1) {
            throw SingularSystem("class is not closed under positive transitions");
        }
    }

    // Solve pi (Q - I) = 0 with one equation replaced by sum(pi) = 1, then
    // verify the full fixed-point identity (covers the replaced equation and
    // enforces rank deficiency exactly 1).
    RationalMatrix lhs(m, m), rhs(m, 1);
    for (std::size_t j = 0; j < m; ++j) {
        lhs(0, j) = 1;
    }
    rhs(0, 0) = 1;
    for (std::size_t eq = 1; eq < m; ++eq) {
        for (std::size_t j = 0; j < m; ++j) {
            lhs(eq, j) = q(j, eq) - (j == eq ? 1 : 0);
        }
    }
    RationalMatrix sol = [&] {
        try {
            return solve_linear(std::move(lhs), std::move(rhs));
        } catch (const SingularMatrix&) {
            throw SingularSystem("stationary system is singular; class not irreducible");
        }
    }();

    std::vector<Rational> pi(m);
    for (std::size_t i = 0; i < m; ++i) {
        pi[i] = sol(i, 0);
        if (pi[i] < 0) {
            throw SingularSystem("stationary solve produced a negative entry");
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        Rational dot = 0;
        for (std::size_t i = 0; i < m; ++i) {
            dot += pi[i] * q(i, j);
        }
        if (dot != pi[j]) {
            throw SingularSystem("stationary verification pi P = pi failed");
        }
    }
    return pi;
}

MuIndependenceReport mu_independence(const SandpileModel& model,
                                     const std::vector<AdditionDistribution>& mus) {
    ExactSolver solver(model);
    MuIndependenceReport report;
    bool first = true;
    for (const auto& mu : mus) {
        RationalMatrix p = solver.collapse(mu);
        auto decomposition = chain_decomposition(p);
        std::size_t cls_id = decomposition.class_of[solver.maximal_state_index()];
        if (!decomposition.recurrent[cls_id]) {
            throw RecurrentClassMismatch("maximal state lies in a transient class");
        }
        const auto& cls = decomposition.classes[cls_id];
        if (first) {
            report.recurrent_class = cls;
            first = false;
        } else if (cls != report.recurrent_class) {
            throw RecurrentClassMismatch("recurrent class of the maximal state differs across mu");
        }
        report.pis.push_back(stationary(p, cls));
    }
    for (std::size_t i = 1; i < report.pis.size(); ++i) {
        if (report.pis[i] != report.pis[0]) {
            report.holds = false;
        }
    }
    return report;
}

} // namespace sandpile
