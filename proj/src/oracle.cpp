#include "q2sat/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>

namespace q2sat {

namespace {

// ------------------------------------------------- base-field scalars for elimination

// Q[x]/(p) with rational coefficients; p irreducible, so every nonzero element is a unit.
class Scalars {
public:
    explicit Scalars(const NumberField& f) : p_(f.poly().begin(), f.poly().end()), d_(f.degree()) {}

    using S = std::vector<mpq_class>;

    S zero() const { return S(static_cast<std::size_t>(d_)); }
    S from(const FieldElement& e) const {
        S s = zero();
        for (int i = 0; i < d_; ++i) {
            s[i] = mpq_class(e.coeffs()[i], e.mu());
            s[i].canonicalize();
        }
        return s;
    }
    static bool is_zero(const S& a) {
        return std::all_of(a.begin(), a.end(), [](const mpq_class& x) { return sgn(x) == 0; });
    }
    S mul(const S& a, const S& b) const {
        if (d_ == 1) return S{a[0] * b[0]};
        S prod(static_cast<std::size_t>(2 * d_ - 1));
        for (int i = 0; i < d_; ++i) {
            if (sgn(a[i]) == 0) continue;
            for (int j = 0; j < d_; ++j) prod[i + j] += a[i] * b[j];
        }
        for (int t = 2 * d_ - 2; t >= d_; --t) {
            if (sgn(prod[t]) == 0) continue;
            for (int i = 0; i < d_; ++i) prod[t - d_ + i] -= prod[t] * p_[i];
        }
        prod.resize(static_cast<std::size_t>(d_));
        return prod;
    }
    void sub_mul(S& a, const S& f, const S& b) const {
        S t = mul(f, b);
        for (int i = 0; i < d_; ++i) a[i] -= t[i];
    }
    S inverse(const S& a) const {
        if (d_ == 1) return S{1 / a[0]};
        // Extended Euclid on (p, a) in Q[x].
        using P = std::vector<mpq_class>;
        auto trim = [](P& x) {
            while (!x.empty() && sgn(x.back()) == 0) x.pop_back();
        };
        P r0 = p_, r1 = a, s0, s1{mpq_class(1)};
        trim(r1);
        while (!r1.empty()) {
            P q(r0.size() >= r1.size() ? r0.size() - r1.size() + 1 : 0), r = r0;
            while (r.size() >= r1.size() && !r.empty()) {
                const std::size_t sh = r.size() - r1.size();
                mpq_class c = r.back() / r1.back();
                q[sh] = c;
                for (std::size_t i = 0; i < r1.size(); ++i) r[sh + i] -= c * r1[i];
                r.pop_back();
                trim(r);
            }
            P qs(q.size() + s1.size(), 0);
            for (std::size_t i = 0; i < q.size(); ++i)
                for (std::size_t j = 0; j < s1.size(); ++j) qs[i + j] += q[i] * s1[j];
            P s2(std::max(s0.size(), qs.size()), 0);
            for (std::size_t i = 0; i < s0.size(); ++i) s2[i] += s0[i];
            for (std::size_t i = 0; i < qs.size(); ++i) s2[i] -= qs[i];
            trim(s2);
            r0 = std::move(r1);
            r1 = std::move(r);
            s0 = std::move(s1);
            s1 = std::move(s2);
        }
        S out = zero();
        // s0 * a == r0 (a nonzero constant) mod p; reduce s0 mod p first.
        P s = s0;
        for (int t = static_cast<int>(s.size()) - 1; t >= d_; --t) {
            if (sgn(s[t]) == 0) continue;
            for (int i = 0; i < d_; ++i) s[t - d_ + i] -= s[t] * p_[i];
        }
        for (int i = 0; i < d_ && i < static_cast<int>(s.size()); ++i) out[i] = s[i] / r0[0];
        return out;
    }

private:
    std::vector<mpq_class> p_;
    int d_;
};

// Incremental reduced row echelon form.
class Eliminator {
public:
    Eliminator(const Scalars& k, std::size_t dim) : k_(k), dim_(dim), pivot_row_(dim, -1) {}

    std::size_t rank() const { return rows_.size(); }

    void add(std::vector<Scalars::S> r) {
        for (std::size_t c = 0; c < dim_; ++c) {
            if (pivot_row_[c] < 0 || Scalars::is_zero(r[c])) continue;
            const Scalars::S f = r[c];
            const auto& pr = rows_[static_cast<std::size_t>(pivot_row_[c])];
            for (std::size_t j = 0; j < dim_; ++j)
                if (!Scalars::is_zero(pr[j])) k_.sub_mul(r[j], f, pr[j]);
        }
        std::size_t p = 0;
        while (p < dim_ && Scalars::is_zero(r[p])) ++p;
        if (p == dim_) return;
        const Scalars::S inv = k_.inverse(r[p]);
        for (auto& x : r)
            if (!Scalars::is_zero(x)) x = k_.mul(x, inv);
        for (auto& row : rows_) {
            if (Scalars::is_zero(row[p])) continue;
            const Scalars::S f = row[p];
            for (std::size_t j = 0; j < dim_; ++j)
                if (!Scalars::is_zero(r[j])) k_.sub_mul(row[j], f, r[j]);
        }
        pivot_row_[p] = static_cast<int>(rows_.size());
        rows_.push_back(std::move(r));
    }

private:
    const Scalars& k_;
    std::size_t dim_;
    std::vector<int> pivot_row_;
    std::vector<std::vector<Scalars::S>> rows_;
};

std::uint64_t component_kernel_dim(const Instance& inst, const std::vector<int>& qubits,
                                   const std::vector<int>& cids, const Scalars& k) {
    const int n = static_cast<int>(qubits.size());
    if (n > kOracleMaxQubits) throw std::invalid_argument("oracle size cap exceeded");
    const std::size_t dim = std::size_t{1} << n;
    std::map<int, int> local;
    for (int i = 0; i < n; ++i) local[qubits[i]] = i;
    Eliminator el(k, dim);
    for (int cid : cids) {
        if (el.rank() == dim) break;
        const Constraint& c = inst.constraints[cid];
        const int bu = n - 1 - local.at(c.u), bv = n - 1 - local.at(c.v);
        Scalars::S eta[4];
        for (int t = 0; t < 4; ++t) eta[t] = k.from(c.eta[t]);
        for (std::size_t rest = 0; rest < dim; ++rest) {
            if ((rest >> bu) & 1 || (rest >> bv) & 1) continue;
            std::vector<Scalars::S> row(dim, k.zero());
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    row[rest | (std::size_t(i) << bu) | (std::size_t(j) << bv)] = eta[2 * i + j];
            el.add(std::move(row));
            if (el.rank() == dim) break;
        }
    }
    return dim - el.rank();
}

// ------------------------------------------------------------ verification

// Maps generator j of a source tower to generator gen[j] of the target.
struct Embedding {
    LevelPtr target;
    std::vector<int> gen;
};

Coeffs remap(const Coeffs& c, int d, const std::vector<int>& gen, std::size_t target_width) {
    Coeffs out(target_width);
    for (std::size_t idx = 0; idx < c.size(); ++idx) {
        if (sgn(c[idx]) == 0) continue;
        const std::size_t mask = idx / static_cast<std::size_t>(d), pw = idx % static_cast<std::size_t>(d);
        std::size_t nm = 0;
        for (std::size_t j = 0; (mask >> j) != 0; ++j)
            if ((mask >> j) & 1) nm |= std::size_t{1} << (gen[j + 1] - 1);
        out[nm * static_cast<std::size_t>(d) + pw] = c[idx];
    }
    return out;
}

FieldElement embed(const FieldElement& e, const Embedding& emb) {
    if (!e.level()) return e.lifted(emb.target);
    return FieldElement(emb.target, e.mu(), remap(e.coeffs(), e.level()->field().degree(), emb.gen, emb.target->width()));
}

class Composita {
public:
    // Embeddings of a and b into one level.
    std::pair<Embedding, Embedding> join(const LevelPtr& a, const LevelPtr& b) {
        auto key = std::make_pair(a.get(), b.get());
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        std::pair<Embedding, Embedding> r = build(a, b);
        memo_.emplace(key, r);
        keep_.push_back(a);
        keep_.push_back(b);
        return r;
    }

private:
    static std::vector<int> identity_map(int k) {
        std::vector<int> g(static_cast<std::size_t>(k) + 1);
        std::iota(g.begin(), g.end(), 0);
        return g;
    }

    std::pair<Embedding, Embedding> build(const LevelPtr& a, const LevelPtr& b) {
        if (is_prefix(*b, *a)) return {{a, identity_map(a->depth())}, {a, identity_map(b->depth())}};
        if (is_prefix(*a, *b)) return {{b, identity_map(a->depth())}, {b, identity_map(b->depth())}};
        if (!a->field().equivalent(b->field())) throw TowerError("factors over different base fields");
        LevelPtr t = a;
        std::vector<int> gb{0};
        for (int j = 1; j <= b->depth(); ++j) {
            const TowerLevel& src = b->ancestor(j);
            Coeffs r = remap(src.radicand(), b->field().degree(), gb, t->width());
            t = TowerLevel::adjoin(t, r, TowerLevel::kMaxScratchDepth);
            gb.push_back(t->depth());
        }
        return {{t, identity_map(a->depth())}, {t, gb}};
    }

    std::map<std::pair<const TowerLevel*, const TowerLevel*>, std::pair<Embedding, Embedding>> memo_;
    std::vector<LevelPtr> keep_;
};

// State on (q, partner) as a 2 x R matrix: column t is the vector on q when the
// partner is |t>; a single factor has R = 1.
struct Factor {
    LevelPtr level;
    std::vector<Vec2> cols;
};

}  // namespace

std::uint64_t brute_kernel_dim(const Instance& inst) {
    const Scalars k(*inst.field);
    // Components by union-find.
    std::vector<int> parent(static_cast<std::size_t>(inst.n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& c : inst.constraints) parent[find(c.u)] = find(c.v);
    std::map<int, std::vector<int>> qubits, cids;
    for (int q = 0; q < inst.n; ++q) qubits[find(q)].push_back(q);
    for (const auto& c : inst.constraints) cids[find(c.u)].push_back(c.id);
    std::uint64_t total = 1;
    for (const auto& [root, qs] : qubits) {
        if (qs.size() == 1) {
            total *= 2;
            continue;
        }
        const std::uint64_t dim = component_kernel_dim(inst, qs, cids[root], k);
        total *= dim;
        if (total == 0) return 0;
    }
    return total;
}

VerifyResult verify_assignment(const Instance& inst, const Assignment& a) {
    VerifyResult res;
    std::vector<int> cover(static_cast<std::size_t>(inst.n), 0);
    for (const auto& [q, s] : a.singles) {
        if (q < 0 || q >= inst.n) return {VerifyResult::Status::CoverageGap, -1, q, "qubit index out of range"};
        ++cover[q];
    }
    for (const auto& [key, p] : a.pairs) {
        for (int q : {key.first, key.second}) {
            if (q < 0 || q >= inst.n) return {VerifyResult::Status::CoverageGap, -1, q, "qubit index out of range"};
            ++cover[q];
        }
    }
    for (int q = 0; q < inst.n; ++q)
        if (cover[q] != 1)
            return {VerifyResult::Status::CoverageGap, -1, q,
                    cover[q] == 0 ? "qubit not assigned" : "qubit assigned more than once"};

    std::map<int, std::pair<int, int>> pair_of;  // qubit -> (partner, position)
    for (const auto& [key, p] : a.pairs) {
        pair_of[key.first] = {key.second, 0};
        pair_of[key.second] = {key.first, 1};
    }
    auto factor_of = [&](int q) {
        Factor f;
        auto s = a.singles.find(q);
        if (s != a.singles.end()) {
            f.level = s->second.level;
            f.cols.push_back(s->second.vec);
            return f;
        }
        const auto [partner, pos] = pair_of.at(q);
        const auto& ps = a.pairs.at(pos == 0 ? std::make_pair(q, partner) : std::make_pair(partner, q));
        f.level = ps.level;
        for (int t = 0; t < 2; ++t)
            f.cols.push_back(pos == 0 ? Vec2{ps.vec[t], ps.vec[2 + t]} : Vec2{ps.vec[2 * t], ps.vec[2 * t + 1]});
        return f;
    };

    Composita comp;
    for (const Constraint& c : inst.constraints) {
        bool ok;
        auto pu = pair_of.find(c.u);
        if (pu != pair_of.end() && pu->second.first == c.v) {
            // Both endpoints in one pair.
            const int first = std::min(c.u, c.v);
            const auto& ps = a.pairs.at({first, std::max(c.u, c.v)});
            const Row eta = c.u == first ? c.eta : Row{c.eta[0], c.eta[2], c.eta[1], c.eta[3]};
            FieldElement acc(0);
            for (int k = 0; k < 4; ++k) acc = acc + eta[k] * ps.vec[k];
            ok = is_zero(acc);
        } else {
            const Factor fu = factor_of(c.u), fv = factor_of(c.v);
            // eta applied to the u side alone.
            bool u_alone = true;
            for (const Vec2& col : fu.cols) {
                for (int j = 0; j < 2 && u_alone; ++j)
                    u_alone = is_zero(c.eta[j] * col[0] + c.eta[2 + j] * col[1]);
                if (!u_alone) break;
            }
            bool v_alone = !u_alone;
            if (!u_alone)
                for (const Vec2& col : fv.cols) {
                    for (int i = 0; i < 2 && v_alone; ++i)
                        v_alone = is_zero(c.eta[2 * i] * col[0] + c.eta[2 * i + 1] * col[1]);
                    if (!v_alone) break;
                }
            ok = u_alone || v_alone;
            if (!ok) {
                const auto [eu, ev] = comp.join(fu.level, fv.level);
                ok = true;
                for (const Vec2& cu : fu.cols)
                    for (const Vec2& cv : fv.cols) {
                        const FieldElement a0 = embed(cu[0], eu), a1 = embed(cu[1], eu);
                        const FieldElement b0 = embed(cv[0], ev), b1 = embed(cv[1], ev);
                        FieldElement acc = c.eta[0] * a0 * b0 + c.eta[1] * a0 * b1 + c.eta[2] * a1 * b0 +
                                           c.eta[3] * a1 * b1;
                        if (!is_zero(acc)) ok = false;
                    }
            }
        }
        if (!ok)
            return {VerifyResult::Status::Violation, c.id, -1,
                    "constraint " + std::to_string(c.id) + " on (" + std::to_string(c.u) + ", " +
                        std::to_string(c.v) + ") is violated"};
    }

    std::map<const TowerLevel*, LevelPtr> closed;
    auto unit = [&](const LevelPtr& level, std::vector<FieldElement> v) {
        LevelPtr& cl = closed[level.get()];
        if (!cl) cl = close_under_conjugation(level, nullptr, TowerLevel::kMaxScratchDepth);
        for (auto& x : v) x = x.lifted(cl);
        return fe_eq(inner_product(v, v), FieldElement(1));
    };
    for (const auto& [q, s] : a.singles)
        if (!unit(s.level, {s.vec[0], s.vec[1]}))
            return {VerifyResult::Status::NotNormalized, -1, q, "qubit " + std::to_string(q) + " is not a unit vector"};
    for (const auto& [key, p] : a.pairs)
        if (!unit(p.level, {p.vec[0], p.vec[1], p.vec[2], p.vec[3]}))
            return {VerifyResult::Status::NotNormalized, -1, key.first,
                    "pair (" + std::to_string(key.first) + ", " + std::to_string(key.second) + ") is not a unit vector"};
    return res;
}

// ------------------------------------------------------------ classical 2-SAT

bool classical_2sat_reference(const Cnf& f) {
    const int n = f.num_vars;
    // Literal node: 2*(var) for x, 2*(var)+1 for not x.
    auto node = [](int lit) { return 2 * (std::abs(lit) - 1) + (lit < 0 ? 1 : 0); };
    const int N = 2 * n;
    std::vector<std::vector<int>> g(static_cast<std::size_t>(N));
    for (const auto& c : f.clauses) {
        if (c.empty()) return false;
        const int a = c[0], b = c.size() > 1 ? c[1] : c[0];
        if (c.size() > 2) throw std::invalid_argument("clause with more than two literals");
        g[node(-a)].push_back(node(b));
        g[node(-b)].push_back(node(a));
    }
    // Iterative Tarjan.
    std::vector<int> index(static_cast<std::size_t>(N), -1), low(static_cast<std::size_t>(N), 0),
        comp(static_cast<std::size_t>(N), -1);
    std::vector<char> on_stack(static_cast<std::size_t>(N), 0);
    std::vector<int> st;
    std::vector<std::pair<int, std::size_t>> call;
    int counter = 0, comps = 0;
    for (int s = 0; s < N; ++s) {
        if (index[s] >= 0) continue;
        call.emplace_back(s, 0);
        index[s] = low[s] = counter++;
        st.push_back(s);
        on_stack[s] = 1;
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i < g[v].size()) {
                const int w = g[v][i++];
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    st.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                int w;
                do {
                    w = st.back();
                    st.pop_back();
                    on_stack[w] = 0;
                    comp[w] = comps;
                } while (w != v);
                ++comps;
            }
            const int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    for (int v = 0; v < n; ++v)
        if (comp[2 * v] == comp[2 * v + 1]) return false;
    return true;
}

bool truth_table_sat(const Cnf& f) {
    if (f.num_vars > 24) throw std::invalid_argument("truth table limited to 24 variables");
    const std::uint32_t total = std::uint32_t{1} << f.num_vars;
    for (std::uint32_t x = 0; x < total; ++x) {
        bool all = true;
        for (const auto& c : f.clauses) {
            bool sat = false;
            for (int lit : c) {
                const bool val = (x >> (std::abs(lit) - 1)) & 1;
                if (val == (lit > 0)) {
                    sat = true;
                    break;
                }
            }
            if (!sat) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

}  // namespace q2sat
