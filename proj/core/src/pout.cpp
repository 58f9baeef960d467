#include "mttlab/pout.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <unordered_set>

namespace mttlab {

ParamMask mask_of(const std::vector<int>& params) {
    ParamMask m = 0;
    for (int j : params) m |= ParamMask{1} << std::min(j, 63);
    return m;
}

std::vector<int> params_in(ParamMask mask) {
    std::vector<int> out;
    for (int j = 1; j < 64; ++j)
        if ((mask >> j) & 1) out.push_back(j);
    return out;
}

Tree lcop(const Tree& s, ParamMask yp) {
    if ((s.param_mask() & yp) == 0) return Tree::make(Symbol::nop());
    if (s.label().is_param()) return s;
    std::vector<Tree> kids;
    for (const Tree& c : s.children()) kids.push_back(lcop(c, yp));
    return Tree::make(s.label(), std::move(kids));
}

// All parameter indices below t, counting set leaves.
static ParamMask all_params(const Tree& t) {
    ParamMask m = t.param_mask();
    if (t.label().kind() == SymbolKind::param_set) m |= mask_of(t.label().indices());
    for (const Tree& c : t.children()) m |= all_params(c);
    return m;
}

Tree lcop_refined(const Tree& s, ParamMask yp) {
    if ((s.param_mask() & yp) == 0) return Tree::make(Symbol::param_set(params_in(all_params(s))));
    if (s.label().is_param()) return s;
    if (s.label().kind() == SymbolKind::nop)
        throw Error(ErrorCode::internal, "pruned region carries a tracked parameter");
    std::vector<Tree> kids;
    for (const Tree& c : s.children()) kids.push_back(lcop_refined(c, yp));
    return Tree::make(s.label(), std::move(kids));
}

Tree erase_sets(const Tree& t) {
    if (t.label().kind() == SymbolKind::param_set) return Tree::make(Symbol::nop());
    if (t.arity() == 0) return t;
    std::vector<Tree> kids;
    for (const Tree& c : t.children()) kids.push_back(erase_sets(c));
    return Tree::make(t.label(), std::move(kids));
}

static void canonicalize(std::vector<Tree>& v) {
    std::unordered_set<Tree, TreeHash> seen;
    std::erase_if(v, [&](const Tree& t) { return !seen.insert(t).second; });
    std::sort(v.begin(), v.end(), canonical_less);
}

std::vector<Tree> pout_enumerate(const Mtt& m, int q, ParamMask yp, int p, std::size_t budget) {
    return PoutEnumerator(m, budget).forms(q, yp, p, budget);
}

PoutEnumerator::PoutEnumerator(const Mtt& m, std::size_t max_size)
    : m_(m), ev_(m), max_size_(max_size), members_(m.lookahead().enumerate_all(max_size)) {}

Tree PoutEnumerator::lcop_cached(const Tree& s, ParamMask yp) {
    if ((s.param_mask() & yp) == 0) return Tree::make(Symbol::nop());
    if (s.label().is_param()) return s;
    auto key = std::make_pair(static_cast<const void*>(s.node()), yp);
    auto it = lcop_.find(key);
    if (it != lcop_.end()) return it->second;
    std::vector<Tree> kids;
    for (const Tree& c : s.children()) kids.push_back(lcop_cached(c, yp));
    Tree out = Tree::make(s.label(), std::move(kids));
    lcop_.emplace(key, out);
    return out;
}

std::vector<Tree> PoutEnumerator::forms(int q, ParamMask yp, int p, std::size_t budget) {
    if (budget > max_size_) throw Error(ErrorCode::not_applicable, "budget exceeds the enumeration size");
    std::vector<Tree> out;
    for (const Tree& s : members_[p]) {
        if (s.size() > budget) break;
        out.push_back(lcop_cached(ev_.eval(q, s), yp));
    }
    canonicalize(out);
    return out;
}

Symbol hole_symbol() { return Symbol::mark("hole"); }

Tree plug(const Tree& context, const Tree& filler) {
    return first_order_subst(context, {{hole_symbol(), filler}});
}

Tree PoutWitness::pumped(int k) const {
    Tree inner = base;
    for (int i = 0; i < k; ++i) inner = plug(cycle, inner);
    return plug(prefix, inner);
}

// ---------------------------------------------------------------------------

PoutAnalysis::PoutAnalysis(const Mtt& m) : m_(m) {
    max_rank_ = std::max(1, m.max_state_rank());
    build_enriched();
    build_graph();
}

int PoutAnalysis::node_id(int q, int e, int l) const {
    return (e * static_cast<int>(m_.state_count()) + q) * max_rank_ + (l - 1);
}

namespace {

// M_r(s_i) = y_l' is recorded in z; decides whether t evaluates to y_l.
bool equals_param(const Mtt& m, const Tree& t, int l,
                  const std::vector<const PoutAnalysis::Enriched*>& kids) {
    Symbol lab = t.label();
    if (lab.is_param()) return lab.index() == l;
    if (lab.kind() != SymbolKind::call) return false;
    int r = m.call_target(lab);
    ParamMask z = kids[lab.index() - 1]->z[r];
    for (std::size_t j = 0; j < t.arity(); ++j)
        if (((z >> (j + 1)) & 1) && equals_param(m, t.child(j), l, kids)) return true;
    return false;
}

// Calls f(tuple) for every tuple in [0,n)^k.
template <class F>
void for_each_tuple(int n, int k, F&& f) {
    std::vector<int> cur(static_cast<std::size_t>(k), 0);
    if (k > 0 && n == 0) return;
    while (true) {
        f(cur);
        int pos = k - 1;
        while (pos >= 0 && ++cur[pos] == n) cur[pos--] = 0;
        if (pos < 0) return;
    }
}

}  // namespace

void PoutAnalysis::build_enriched() {
    const auto& in = m_.input();
    const auto& la = m_.lookahead();
    std::set<std::pair<std::size_t, std::vector<int>>> done;
    bool grew = true;
    while (grew) {
        grew = false;
        int n = static_cast<int>(enriched_.size());
        for (std::size_t s = 0; s < in.size(); ++s) {
            for_each_tuple(n, in[s].rank, [&](const std::vector<int>& tuple) {
                if (!done.insert({s, tuple}).second) return;
                std::vector<const Enriched*> kids;
                std::vector<int> bases;
                std::vector<Tree> wit;
                for (int c : tuple) {
                    kids.push_back(&enriched_[c]);
                    bases.push_back(enriched_[c].la);
                    wit.push_back(enriched_[c].witness);
                }
                int p = la.next(s, bases);
                std::vector<ParamMask> z(m_.state_count(), 0);
                for (std::size_t q = 0; q < m_.state_count(); ++q) {
                    const Tree& rhs = m_.rule(static_cast<int>(q), s, bases);
                    for (int l = 1; l <= m_.rank(static_cast<int>(q)); ++l)
                        if (equals_param(m_, rhs, l, kids)) z[q] |= ParamMask{1} << l;
                }
                auto key = std::make_pair(p, z);
                if (enriched_index_.count(key)) return;
                // kids may dangle after push_back; nothing uses them below.
                enriched_index_.emplace(key, static_cast<int>(enriched_.size()));
                enriched_.push_back({p, std::move(z), Tree::make(in[s].symbol, std::move(wit))});
                grew = true;
                if (enriched_.size() > state_cap)
                    throw Error(ErrorCode::internal, "too many enriched look-ahead states");
            });
        }
    }
}

void PoutAnalysis::build_graph() {
    const auto& in = m_.input();
    const auto& la = m_.lookahead();
    int E = static_cast<int>(enriched_.size());
    int Q = static_cast<int>(m_.state_count());
    int N = E * Q * max_rank_;
    edges_.assign(N, {});
    std::vector<std::map<int, std::size_t>> seen(N);

    struct Anc {
        int r, i, l;
    };
    for (std::size_t s = 0; s < in.size(); ++s) {
        int k = in[s].rank;
        for_each_tuple(E, k, [&](const std::vector<int>& tuple) {
            std::vector<int> bases;
            for (int c : tuple) bases.push_back(enriched_[c].la);
            int p = la.next(s, bases);
            // The enriched state of the parent.
            std::vector<ParamMask> z(Q, 0);
            std::vector<const Enriched*> kids;
            for (int c : tuple) kids.push_back(&enriched_[c]);
            for (int q = 0; q < Q; ++q) {
                const Tree& rhs = m_.rule(q, s, bases);
                for (int l = 1; l <= m_.rank(q); ++l)
                    if (equals_param(m_, rhs, l, kids)) z[q] |= ParamMask{1} << l;
            }
            int e = enriched_index_.at({p, z});
            for (int q = 0; q < Q; ++q) {
                if (m_.rank(q) == 0) continue;
                std::vector<Anc> anc;
                std::function<void(const Tree&, int)> walk = [&](const Tree& t, int delta) {
                    Symbol lab = t.label();
                    if (lab.is_param()) {
                        int l = lab.index();
                        int from = node_id(q, e, l);
                        for (std::size_t a = 0; a < anc.size(); ++a) {
                            bool positive = delta > 0;
                            for (std::size_t b = 0; b < anc.size() && !positive; ++b) {
                                if (b == a) continue;
                                ParamMask zz = enriched_[tuple[anc[b].i - 1]].z[anc[b].r];
                                if (!((zz >> anc[b].l) & 1)) positive = true;
                            }
                            int to = node_id(anc[a].r, tuple[anc[a].i - 1], anc[a].l);
                            auto hit = seen[from].find(to);
                            Edge edge{to, positive, s, tuple, anc[a].i - 1};
                            if (hit == seen[from].end()) {
                                seen[from].emplace(to, edges_[from].size());
                                edges_[from].push_back(std::move(edge));
                            } else if (positive && !edges_[from][hit->second].positive) {
                                edges_[from][hit->second] = std::move(edge);
                            }
                        }
                        return;
                    }
                    if (lab.kind() == SymbolKind::call) {
                        int r = m_.call_target(lab);
                        for (std::size_t j = 0; j < t.arity(); ++j) {
                            anc.push_back({r, lab.index(), static_cast<int>(j) + 1});
                            walk(t.child(j), delta);
                            anc.pop_back();
                        }
                        return;
                    }
                    for (const Tree& c : t.children()) walk(c, delta + 1);
                };
                walk(m_.rule(q, s, bases), 0);
            }
        });
    }

    // Strongly connected components (Tarjan, iterative).
    scc_.assign(N, -1);
    std::vector<int> index(N, -1), low(N, 0), stack;
    std::vector<char> on_stack(N, 0);
    int counter = 0, comps = 0;
    for (int root = 0; root < N; ++root) {
        if (index[root] >= 0) continue;
        std::vector<std::pair<int, std::size_t>> work{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!work.empty()) {
            auto& [v, next] = work.back();
            if (next < edges_[v].size()) {
                int w = edges_[v][next++].to;
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    work.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    scc_[w] = comps;
                    if (w == v) break;
                }
                ++comps;
            }
            int done = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
        }
    }
    scc_pumping_.assign(comps, 0);
    for (int v = 0; v < N; ++v)
        for (const Edge& ed : edges_[v])
            if (ed.positive && scc_[ed.to] == scc_[v]) scc_pumping_[scc_[v]] = 1;

    // Nodes that reach a pumping component.
    std::vector<std::vector<int>> rev(N);
    for (int v = 0; v < N; ++v)
        for (const Edge& ed : edges_[v]) rev[ed.to].push_back(v);
    infinite_node_.assign(N, 0);
    std::deque<int> queue;
    for (int v = 0; v < N; ++v)
        if (scc_pumping_[scc_[v]]) {
            infinite_node_[v] = 1;
            queue.push_back(v);
        }
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int u : rev[v])
            if (!infinite_node_[u]) {
                infinite_node_[u] = 1;
                queue.push_back(u);
            }
    }

    fmask_.assign(la.state_count(), std::vector<ParamMask>(Q, 0));
    for (std::size_t p = 0; p < la.state_count(); ++p)
        for (int q = 0; q < Q; ++q)
            for (int l = 1; l <= m_.rank(q); ++l)
                if (finite(q, l, static_cast<int>(p))) fmask_[p][q] |= ParamMask{1} << l;
}

bool PoutAnalysis::finite(int q, int l, int p) const {
    for (std::size_t e = 0; e < enriched_.size(); ++e)
        if (enriched_[e].la == p && infinite_node_[node_id(q, static_cast<int>(e), l)]) return false;
    return true;
}

Tree PoutAnalysis::context_of(const Edge& edge) const {
    std::vector<Tree> kids;
    for (std::size_t i = 0; i < edge.children.size(); ++i)
        kids.push_back(static_cast<int>(i) == edge.child ? Tree::make(hole_symbol())
                                                         : enriched_[edge.children[i]].witness);
    return Tree::make(m_.input()[edge.symbol].symbol, std::move(kids));
}

PoutResult PoutAnalysis::pout_finite(int q, int l, int p) {
    if (m_.rank(q) == 0)
        throw Error(ErrorCode::not_applicable, "state " + m_.state_name(q) + " has no parameters");
    if (l < 1 || l > m_.rank(q))
        throw Error(ErrorCode::param_out_of_arity,
                    "y" + std::to_string(l) + " is not a parameter of " + m_.state_name(q));
    PoutResult result;
    if (finite(q, l, p)) {
        result.finite = true;
        result.forms = pout(q, ParamMask{1} << l, p);
        return result;
    }
    result.finite = false;
    int start = -1;
    for (std::size_t e = 0; e < enriched_.size() && start < 0; ++e)
        if (enriched_[e].la == p && infinite_node_[node_id(q, static_cast<int>(e), l)])
            start = node_id(q, static_cast<int>(e), l);

    // Shortest path avoiding nothing; restricted to a component if asked.
    auto path = [&](int from, const std::function<bool(int)>& goal, int comp) {
        std::map<int, std::pair<int, const Edge*>> parent;
        std::deque<int> queue{from};
        parent[from] = {-1, nullptr};
        int hit = goal(from) ? from : -1;
        while (!queue.empty() && hit < 0) {
            int v = queue.front();
            queue.pop_front();
            for (const Edge& ed : edges_[v]) {
                if (comp >= 0 && scc_[ed.to] != comp) continue;
                if (parent.count(ed.to)) continue;
                parent[ed.to] = {v, &ed};
                if (goal(ed.to)) {
                    hit = ed.to;
                    break;
                }
                queue.push_back(ed.to);
            }
        }
        std::vector<const Edge*> out;
        for (int v = hit; parent[v].second; v = parent[v].first) out.push_back(parent[v].second);
        std::reverse(out.begin(), out.end());
        return std::make_pair(hit, out);
    };
    auto compose = [&](const std::vector<const Edge*>& steps) {
        Tree ctx = Tree::make(hole_symbol());
        for (const Edge* ed : steps) ctx = plug(ctx, context_of(*ed));
        return ctx;
    };

    auto [a, prefix] = path(start, [&](int v) { return scc_pumping_[scc_[v]] != 0; }, -1);
    int comp = scc_[a];
    const Edge* pos = nullptr;
    int pos_from = -1;
    for (int v = 0; v < static_cast<int>(edges_.size()) && !pos; ++v)
        if (scc_[v] == comp)
            for (const Edge& ed : edges_[v])
                if (ed.positive && scc_[ed.to] == comp) {
                    pos = &ed;
                    pos_from = v;
                    break;
                }
    auto to_b = path(a, [&](int v) { return v == pos_from; }, comp).second;
    auto back = path(pos->to, [&](int v) { return v == a; }, comp).second;
    std::vector<const Edge*> cycle = to_b;
    cycle.push_back(pos);
    cycle.insert(cycle.end(), back.begin(), back.end());

    int e_a = a / max_rank_ / static_cast<int>(m_.state_count());
    result.witness = PoutWitness{p, compose(prefix), compose(cycle), enriched_[e_a].witness};
    return result;
}

// ---------------------------------------------------------------------------

Tree PoutAnalysis::theta_prime(const Tree& rhs, const std::vector<int>& children, ParamMask keep) {
    std::function<Tree(const Tree&, const std::vector<Tree>&)> instantiate =
        [&](const Tree& form, const std::vector<Tree>& args) -> Tree {
        Symbol lab = form.label();
        if (lab.is_param()) return args[lab.index() - 1];
        if (lab.kind() == SymbolKind::param_set) {
            std::vector<Tree> blob;
            for (int j : lab.indices()) blob.push_back(args[j - 1]);
            return Tree::make(Symbol::nop(), std::move(blob));
        }
        std::vector<Tree> kids;
        for (const Tree& c : form.children()) kids.push_back(instantiate(c, args));
        return Tree::make(lab, std::move(kids));
    };
    std::function<Tree(const Tree&)> sub = [&](const Tree& t) -> Tree {
        Symbol lab = t.label();
        if (lab.is_param()) return t;
        std::vector<Tree> kids;
        for (const Tree& c : t.children()) kids.push_back(sub(c));
        if (lab.kind() == SymbolKind::call) {
            int r = m_.call_target(lab);
            const PhiState& child = phi_states_[children[lab.index() - 1]];
            if (in_F1(child.la, r)) return instantiate(child.phi[r], kids);
            return Tree::make(Symbol::nop(), std::move(kids));
        }
        return Tree::make(lab, std::move(kids));
    };
    return lcop_refined(sub(rhs), keep);
}

void PoutAnalysis::build_phi() {
    if (phi_built_) return;
    phi_built_ = true;
    const auto& in = m_.input();
    const auto& la = m_.lookahead();
    int Q = static_cast<int>(m_.state_count());
    bool grew = true;
    while (grew) {
        grew = false;
        int n = static_cast<int>(phi_states_.size());
        for (std::size_t s = 0; s < in.size(); ++s) {
            for_each_tuple(n, in[s].rank, [&](const std::vector<int>& tuple) {
                if (phi_trans_.count({s, tuple})) return;
                std::vector<int> bases;
                std::vector<Tree> wit;
                for (int c : tuple) {
                    bases.push_back(phi_states_[c].la);
                    wit.push_back(phi_states_[c].witness);
                }
                int p = la.next(s, bases);
                std::vector<Tree> phi(Q);
                std::vector<const void*> key;
                for (int q = 0; q < Q; ++q) {
                    if (in_F1(p, q)) phi[q] = theta_prime(m_.rule(q, s, bases), tuple, F(p, q));
                    key.push_back(phi[q].valid() ? phi[q].node() : nullptr);
                }
                auto it = phi_index_.find({p, key});
                int idx;
                if (it == phi_index_.end()) {
                    idx = static_cast<int>(phi_states_.size());
                    phi_index_.emplace(std::make_pair(p, key), idx);
                    phi_states_.push_back({p, std::move(phi), Tree::make(in[s].symbol, std::move(wit))});
                    grew = true;
                    if (phi_states_.size() > state_cap)
                        throw Error(ErrorCode::internal, "too many refined look-ahead states");
                } else {
                    idx = it->second;
                }
                phi_trans_.emplace(std::make_pair(s, tuple), idx);
            });
        }
    }
}

const std::vector<PoutAnalysis::PhiState>& PoutAnalysis::phi_states() {
    build_phi();
    return phi_states_;
}

int PoutAnalysis::phi_next(std::size_t symbol, const std::vector<int>& children) {
    build_phi();
    return phi_trans_.at({symbol, children});
}

std::vector<Tree> PoutAnalysis::pout(int q, ParamMask yp, int p) {
    std::vector<Tree> out;
    for (const Tree& t : pout_f(q, yp, p)) out.push_back(erase_sets(t));
    canonicalize(out);
    return out;
}

std::vector<Tree> PoutAnalysis::pout_f(int q, ParamMask yp, int p) {
    if (yp & ~F(p, q))
        throw Error(ErrorCode::infinite_pout, "pout of " + m_.state_name(q) + " is infinite");
    build_phi();
    std::vector<Tree> out;
    ParamMask all = 0;
    for (int j = 1; j <= m_.rank(q); ++j) all |= ParamMask{1} << j;
    for (const PhiState& st : phi_states_) {
        if (st.la != p) continue;
        if (yp == 0)
            out.push_back(Tree::make(Symbol::param_set(params_in(all))));
        else
            out.push_back(lcop_refined(st.phi[q], yp));
    }
    canonicalize(out);
    return out;
}

// ---------------------------------------------------------------------------

PoutResult pout_finite(const Mtt& m, int q, int l, int p) {
    PoutAnalysis a(m);
    return a.pout_finite(q, l, p);
}

FSets compute_F(const Mtt& m, int p) {
    PoutAnalysis a(m);
    FSets out;
    for (std::size_t q = 0; q < m.state_count(); ++q) {
        int qi = static_cast<int>(q);
        ParamMask f = a.F(p, qi);
        for (int l : params_in(f)) out.F.emplace_back(qi, l);
        if (f) out.F1.push_back(qi);
        out.F_of[qi] = f;
    }
    return out;
}

std::vector<Tree> pout_f(const Mtt& m, int q, ParamMask yp, int p) {
    PoutAnalysis a(m);
    return a.pout_f(q, yp, p);
}

std::vector<ParamMap> phi_set(const Mtt& m, int p) {
    PoutAnalysis a(m);
    std::vector<ParamMap> out{ParamMap{}};
    for (std::size_t q = 0; q < m.state_count(); ++q) {
        int qi = static_cast<int>(q);
        if (!a.in_F1(p, qi)) continue;
        std::vector<ParamMap> next;
        for (const ParamMap& partial : out)
            for (const Tree& t : a.pout_f(qi, a.F(p, qi), p)) {
                ParamMap ext = partial;
                ext[qi] = t;
                next.push_back(std::move(ext));
            }
        out = std::move(next);
    }
    return out;
}

}  // namespace mttlab
