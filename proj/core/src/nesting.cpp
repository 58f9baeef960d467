#include "mttlab/nesting.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <memory>
#include <set>
#include <tuple>
#include <unordered_map>

#include "mttlab/normalize.hpp"
#include "mttlab/pout.hpp"

namespace mttlab {

// ---------------------------------------------------------------------------
// M#

Mtt sharpen(const Mtt& m) {
    RankedAlphabet out = m.output();
    for (std::size_t q = 0; q < m.state_count(); ++q) out.add(Symbol::sharp(m.state_name(static_cast<int>(q))), 1);
    Mtt s(m.name(), m.input(), out, m.lookahead());
    for (std::size_t q = 0; q < m.state_count(); ++q) s.add_state(m.state_name(static_cast<int>(q)), m.rank(static_cast<int>(q)));
    s.set_initial(m.initial());
    m.for_each_rule([&](int q, std::size_t sym, const std::vector<int>& la, const Tree& rhs) {
        s.put_rule(q, sym, la, Tree::make(Symbol::sharp(m.state_name(q)), {rhs}));
    });
    return s;
}

Tree erase_sharps(const Tree& t) {
    if (t.label().kind() == SymbolKind::sharp) return erase_sharps(t.child(0));
    std::vector<Tree> kids;
    for (const Tree& c : t.children()) kids.push_back(erase_sharps(c));
    return Tree::make(t.label(), std::move(kids));
}

namespace {

// Output of M# with origins.  A wrapper (invalid label) marks the root of
// the `arg`-th argument of the call instance `owner`; it occupies no
// position in the output.
struct ONode {
    Symbol label;
    Path origin;
    int id = 0;
    int owner = 0;
    int arg = 0;
    bool params = false;
    std::vector<std::shared_ptr<const ONode>> kids;
};
using OPtr = std::shared_ptr<const ONode>;

class OriginEvaluator {
public:
    explicit OriginEvaluator(const Mtt& m) : m_(m) {}

    OPtr eval(int q, const Tree& s, const Path& u) {
        auto key = std::make_pair(q, u);
        auto hit = memo_.find(key);
        if (hit != memo_.end()) return hit->second;
        auto idx = m_.input().find(s.label());
        if (!idx || m_.input()[*idx].rank != static_cast<int>(s.arity()))
            throw Error(ErrorCode::unknown_symbol, "symbol " + s.label().text() + " is not in the input alphabet");
        std::vector<int> args;
        for (const Tree& c : s.children()) args.push_back(m_.lookahead().run(c));
        const Tree& rhs = m_.rule(q, *idx, args);
        auto root = std::make_shared<ONode>();
        root->label = Symbol::sharp(m_.state_name(q));
        root->origin = u;
        root->id = ++counter_;
        root->kids.push_back(build(rhs, s, u));
        root->params = root->kids[0]->params;
        memo_.emplace(key, root);
        return root;
    }

private:
    OPtr build(const Tree& t, const Tree& s, const Path& u) {
        Symbol lab = t.label();
        if (lab.is_param()) {
            auto n = std::make_shared<ONode>();
            n->label = lab;
            n->params = true;
            return n;
        }
        std::vector<OPtr> kids;
        for (const Tree& c : t.children()) kids.push_back(build(c, s, u));
        if (lab.kind() == SymbolKind::call) {
            int i = lab.index();
            OPtr callee = eval(m_.call_target(lab), s.child(static_cast<std::size_t>(i - 1)), u.child(i));
            return subst(callee, kids, callee->id);
        }
        auto n = std::make_shared<ONode>();
        n->label = lab;
        n->origin = u;
        for (auto& k : kids) n->params = n->params || k->params;
        n->kids = std::move(kids);
        return n;
    }

    OPtr subst(const OPtr& t, const std::vector<OPtr>& args, int owner) {
        if (!t->params) return t;
        if (t->label.is_param()) {
            auto w = std::make_shared<ONode>();
            w->owner = owner;
            w->arg = t->label.index();
            w->kids.push_back(args[static_cast<std::size_t>(t->label.index() - 1)]);
            w->params = w->kids[0]->params;
            return w;
        }
        auto n = std::make_shared<ONode>(*t);
        n->params = false;
        for (auto& k : n->kids) {
            k = subst(k, args, owner);
            n->params = n->params || k->params;
        }
        return n;
    }

    const Mtt& m_;
    std::map<std::pair<int, Path>, OPtr> memo_;
    int counter_ = 0;
};

constexpr std::size_t visit_cap = 4'000'000;

// Pre-order walk over output positions; wrappers are skipped.
template <class F>
void walk_output(const OPtr& root, F&& visit) {
    std::size_t visited = 0;
    std::function<void(const OPtr&, std::vector<int>&)> go = [&](const OPtr& n, std::vector<int>& v) {
        if (++visited > visit_cap) throw Error(ErrorCode::not_applicable, "output too large to instrument");
        if (!n->label.valid()) {
            go(n->kids[0], v);
            return;
        }
        visit(*n, v);
        for (std::size_t i = 0; i < n->kids.size(); ++i) {
            v.push_back(static_cast<int>(i) + 1);
            go(n->kids[i], v);
            v.pop_back();
        }
    };
    std::vector<int> v;
    go(root, v);
}

}  // namespace

std::vector<OriginPair> origins(const Mtt& m, const Tree& t) {
    OriginEvaluator ev(m);
    OPtr root = ev.eval(m.initial(), t, Path());
    std::vector<OriginPair> out;
    walk_output(root, [&](const ONode& n, const std::vector<int>& v) { out.push_back({n.origin, Path(v)}); });
    return out;
}

// ---------------------------------------------------------------------------
// State call trees

StateCallTree state_call_tree(const Mtt& m, const Tree& t) {
    OriginEvaluator ev(m);
    OPtr root = ev.eval(m.initial(), t, Path());
    StateCallTree sc;
    sc.max_rank_ = std::max(0, m.max_state_rank());
    sc.la_count_ = static_cast<int>(m.la_count());
    sc.output_ = root;

    // Sharp nodes on the current output path (index into nodes_).
    std::vector<std::pair<std::size_t, int>> stack;  // (depth of v, node)
    std::function<void(const OPtr&, std::vector<int>&)> go = [&](const OPtr& n, std::vector<int>& v) {
        if (!n->label.valid()) {
            go(n->kids[0], v);
            return;
        }
        bool pushed = false;
        if (n->label.kind() == SymbolKind::sharp) {
            ScNode node;
            node.input = n->origin;
            node.output = Path(v);
            node.state = *m.find_state(n->label.state());
            node.la = m.lookahead().run(subtree_at(t, n->origin));
            if (!n->origin.empty()) {
                Path up = n->origin.parent();
                for (auto it = stack.rbegin(); it != stack.rend(); ++it)
                    if (sc.nodes_[it->second].input == up) {
                        node.parent = it->second;
                        break;
                    }
                if (node.parent < 0) throw Error(ErrorCode::internal, "state call without parent");
                node.depth = sc.nodes_[node.parent].depth + 1;
            }
            int idx = static_cast<int>(sc.nodes_.size());
            if (node.parent >= 0) sc.nodes_[node.parent].children.push_back(idx);
            sc.nodes_.push_back(std::move(node));
            if (sc.nodes_.size() > visit_cap) throw Error(ErrorCode::not_applicable, "state call tree too large");
            stack.push_back({v.size(), idx});
            pushed = true;
        }
        for (std::size_t i = 0; i < n->kids.size(); ++i) {
            v.push_back(static_cast<int>(i) + 1);
            go(n->kids[i], v);
            v.pop_back();
        }
        if (pushed) stack.pop_back();
    };
    std::vector<int> v;
    go(root, v);
    return sc;
}

StateCallTree trim(const StateCallTree& sc, const Path& u, const Path& v) {
    StateCallTree out;
    out.max_rank_ = sc.max_rank_;
    out.la_count_ = sc.la_count_;
    out.output_ = sc.output_;
    std::vector<int> remap(sc.nodes_.size(), -1);
    for (std::size_t n = 0; n < sc.nodes_.size(); ++n) {
        const ScNode& node = sc.nodes_[n];
        if (!node.input.is_prefix_of(u) || !node.output.is_prefix_of(v)) continue;
        ScNode copy = node;
        copy.children.clear();
        copy.arg = 0;
        copy.parent = node.parent >= 0 ? remap[node.parent] : -1;
        if (node.parent >= 0 && copy.parent < 0) continue;
        remap[n] = static_cast<int>(out.nodes_.size());
        if (copy.parent >= 0) out.nodes_[copy.parent].children.push_back(remap[n]);
        out.nodes_.push_back(std::move(copy));
    }

    // Argument labels: walk the output along v.
    struct Entry {
        Path input;
        Path output;
        int id;
        int arg;
    };
    std::vector<Entry> path;
    auto cur = std::static_pointer_cast<const ONode>(sc.output_);
    std::size_t step = 0;
    while (cur) {
        if (!cur->label.valid()) {
            for (Entry& e : path)
                if (e.id == cur->owner && e.arg == 0) e.arg = cur->arg;
            cur = cur->kids[0];
            continue;
        }
        if (cur->label.kind() == SymbolKind::sharp) path.push_back(Entry{cur->origin, v.prefix(step), cur->id, 0});
        if (step == v.length()) break;
        int k = v[step++];
        if (k < 1 || k > static_cast<int>(cur->kids.size())) break;
        cur = cur->kids[static_cast<std::size_t>(k - 1)];
    }
    for (std::size_t a = 0; a < path.size(); ++a) {
        bool deeper = false;
        for (std::size_t b = a + 1; b < path.size(); ++b) deeper = deeper || path[b].input == path[a].input;
        if (!deeper) continue;
        for (ScNode& n : out.nodes_)
            if (n.input == path[a].input && n.output == path[a].output) n.arg = path[a].arg;
    }
    return out;
}

std::size_t StateCallTree::width() const {
    std::map<int, std::size_t> per_depth;
    std::size_t best = 0;
    for (const ScNode& n : nodes_) best = std::max(best, ++per_depth[n.depth]);
    return best;
}

int StateCallTree::label(int n) const {
    const ScNode& node = nodes_[n];
    return (node.state * la_count_ + node.la) * (max_rank_ + 1) + node.arg;
}

std::optional<std::array<int, 5>> find_pattern(const std::vector<int>& parent, const std::vector<int>& label) {
    int n = static_cast<int>(parent.size());
    std::vector<int> depth(n, 0);
    std::vector<std::vector<int>> kids(n);
    for (int v = 1; v < n; ++v) {
        depth[v] = depth[parent[v]] + 1;
        kids[parent[v]].push_back(v);
    }
    // Descendants of each node grouped by depth.
    std::vector<int> order, first(n), last(n);
    std::function<void(int)> dfs = [&](int v) {
        first[v] = static_cast<int>(order.size());
        order.push_back(v);
        for (int c : kids[v]) dfs(c);
        last[v] = static_cast<int>(order.size());
    };
    if (n > 0) dfs(0);
    auto below = [&](int a, int d2, int lab, int skip) -> int {
        for (int k = first[a] + 1; k < last[a]; ++k) {
            int w = order[k];
            if (depth[w] == d2 && label[w] == lab && w != skip) return w;
        }
        return -1;
    };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            if (a == b || depth[a] != depth[b]) continue;
            for (int k = first[a] + 1; k < last[a]; ++k) {
                int x = order[k];
                if (label[x] != label[a]) continue;
                int y = below(a, depth[x], label[b], x);
                if (y < 0) continue;
                int z = below(b, depth[x], label[b], -1);
                if (z >= 0) return std::array<int, 5>{a, b, x, y, z};
            }
        }
    return std::nullopt;
}

std::optional<std::array<int, 5>> find_pattern(const StateCallTree& sc) {
    std::vector<int> parent, label;
    for (std::size_t n = 0; n < sc.size(); ++n) {
        parent.push_back(std::max(0, sc.nodes()[n].parent));
        label.push_back(sc.label(static_cast<int>(n)));
    }
    return find_pattern(parent, label);
}

// ---------------------------------------------------------------------------
// Generator loops

const char* to_string(LoopKind kind) {
    return kind == LoopKind::nesting ? "Nesting" : "MLNesting";
}

Symbol hole_mark(int which) {
    return Symbol::mark(which == 0 ? "X" : which == 1 ? "X1" : "X2");
}

Tree GeneratorLoop::instance(int k, const Tree& t, const Tree& t0) const {
    Tree inner = kind == LoopKind::nesting ? t : t0;
    for (int n = 0; n < k; ++n) {
        if (kind == LoopKind::nesting)
            inner = first_order_subst(context, {{hole_mark(0), inner}});
        else
            inner = first_order_subst(context, {{hole_mark(1), inner}, {hole_mark(2), t}});
    }
    return first_order_subst(prefix, {{hole_mark(0), inner}});
}

namespace {


// Depths of the proper ancestors of position `at` labelled `call` with `at`
// in their `arg`-th argument.
std::vector<std::size_t> ancestors_at(const Tree& t, const Path& at, Symbol call, int arg) {
    std::vector<std::size_t> out;
    Tree cur = t;
    for (std::size_t d = 0; d < at.length(); ++d) {
        if (cur.label() == call && at[d] == arg) out.push_back(d);
        cur = cur.child(static_cast<std::size_t>(at[d] - 1));
    }
    return out;
}

// Two different call nodes on the way to `at`: one labelled c1 entered
// through argument a1, the other labelled c2 entered through a2.
bool below_both(const Tree& t, const Path& at, Symbol c1, int a1, Symbol c2, int a2) {
    auto x = ancestors_at(t, at, c1, a1);
    auto y = ancestors_at(t, at, c2, a2);
    for (std::size_t u : x)
        for (std::size_t v : y)
            if (u != v) return true;
    return false;
}

// Some occurrence of `lab` lies below two different call nodes as in below_both.
bool some_occurrence_below(const Tree& t, Symbol lab, Symbol c1, int a1, Symbol c2, int a2) {
    for (const Path& at : nodes(t))
        if (label_at(t, at) == lab && below_both(t, at, c1, a1, c2, a2)) return true;
    return false;
}

// A node labelled `outer` whose `arg`-th argument (any if 0) satisfies pred.
bool in_argument(const Tree& t, Symbol outer, int arg, const std::function<bool(const Tree&)>& pred) {
    if (t.label() == outer)
        for (std::size_t a = 0; a < t.arity(); ++a)
            if ((arg == 0 || static_cast<int>(a) + 1 == arg) && pred(t.child(a))) return true;
    for (const Tree& c : t.children())
        if (in_argument(c, outer, arg, pred)) return true;
    return false;
}

std::size_t hole_count(const Tree& t, Symbol hole) { return count_label(t, hole); }

bool prefix_ok(const Mtt& m, const Tree& prefix, int q0, int p) {
    if (!prefix.valid()) return true;
    if (hole_count(prefix, hole_mark(0)) != 1) return false;
    Evaluator ev(m, {{hole_mark(0), p}});
    return contains_label(ev.apply(prefix), Symbol::mark_call(m.state_name(q0), "X"));
}

constexpr std::uint64_t output_cap = 2'000'000;

}  // namespace

bool is_nesting_loop(const Mtt& m, const GeneratorLoop& loop) {
    if (loop.kind != LoopKind::nesting || !loop.context.valid()) return false;
    if (loop.la < 0 || loop.q < 0 || loop.q0 < 0) return false;
    if (hole_count(loop.context, hole_mark(0)) != 1 || loop.context.size() < 2) return false;
    if (loop.i < 1 || loop.i > m.rank(loop.q) || loop.j < 0 || loop.j > m.rank(loop.q0)) return false;
    if (!m.lookahead().nonempty_states()[loop.la]) return false;
    Evaluator ev(m, {{hole_mark(0), loop.la}});
    if (ev.la(loop.context) != loop.la) return false;
    if (!reachable_calls(m).count({loop.q0, loop.la})) return false;
    if (!prefix_ok(m, loop.prefix, loop.q0, loop.la)) return false;
    Symbol cq = Symbol::mark_call(m.state_name(loop.q), "X");
    Symbol cq0 = Symbol::mark_call(m.state_name(loop.q0), "X");
    Tree out_q = ev.eval(loop.q, loop.context);
    ParamMask yi = ParamMask{1} << loop.i;
    if (!in_argument(out_q, cq, loop.i, [&](const Tree& a) { return (a.param_mask() & yi) != 0; })) return false;
    Tree out_q0 = ev.eval(loop.q0, loop.context);
    if (loop.j == 0)
        return in_argument(out_q0, cq, loop.i, [&](const Tree& a) { return contains_label(a, cq0); });
    return some_occurrence_below(out_q0, Symbol::param(loop.j), cq0, loop.j, cq, loop.i);
}

bool is_ml_nesting_loop(const Mtt& m, const GeneratorLoop& loop) {
    if (loop.kind != LoopKind::ml_nesting || !loop.context.valid()) return false;
    if (loop.la < 0 || loop.la0 < 0 || loop.q < 0 || loop.q0 < 0) return false;
    if (hole_count(loop.context, hole_mark(1)) != 1 || hole_count(loop.context, hole_mark(2)) != 1) return false;
    if (loop.i < 1 || loop.i > m.rank(loop.q) || loop.j < 0 || loop.j > m.rank(loop.q0)) return false;
    auto nonempty = m.lookahead().nonempty_states();
    if (!nonempty[loop.la] || !nonempty[loop.la0]) return false;
    Evaluator ev(m, {{hole_mark(1), loop.la0}, {hole_mark(2), loop.la}});
    if (ev.la(loop.context) != loop.la0) return false;
    if (!reachable_calls(m).count({loop.q0, loop.la0})) return false;
    if (!prefix_ok(m, loop.prefix, loop.q0, loop.la0)) return false;
    Symbol cq = Symbol::mark_call(m.state_name(loop.q), "X2");
    Symbol cq0 = Symbol::mark_call(m.state_name(loop.q0), "X1");
    Tree out = ev.eval(loop.q0, loop.context);
    if (loop.j == 0)
        return in_argument(out, cq, loop.i, [&](const Tree& a) { return contains_label(a, cq0); });
    return some_occurrence_below(out, Symbol::param(loop.j), cq0, loop.j, cq, loop.i);
}

std::optional<Tree> call_context(const Mtt& m, int q, int p) {
    const auto& la = m.lookahead();
    auto nonempty = la.nonempty_states();
    auto samples = la.sample_trees();
    std::map<std::pair<int, int>, Tree> ctx;
    std::deque<std::pair<int, int>> work;
    Tree hole = Tree::make(hole_symbol());
    for (std::size_t r = 0; r < m.la_count(); ++r)
        if (nonempty[r]) {
            ctx.emplace(std::make_pair(m.initial(), static_cast<int>(r)), hole);
            work.push_back({m.initial(), static_cast<int>(r)});
        }
    while (!work.empty()) {
        auto cur = work.front();
        work.pop_front();
        if (cur == std::make_pair(q, p)) return first_order_subst(ctx.at(cur), {{hole_symbol(), Tree::make(hole_mark(0))}});
        for (std::size_t s = 0; s < m.input().size(); ++s)
            for (auto& args : la.tuples(m.input()[s].rank)) {
                if (la.next(s, args) != cur.second) continue;
                if (!std::all_of(args.begin(), args.end(), [&](int a) { return nonempty[a]; })) continue;
                for (Symbol c : calls_in(m.rule(cur.first, s, args))) {
                    std::pair<int, int> next{m.call_target(c), args[c.index() - 1]};
                    if (ctx.count(next)) continue;
                    std::vector<Tree> kids;
                    for (std::size_t k = 0; k < args.size(); ++k)
                        kids.push_back(static_cast<int>(k) + 1 == c.index() ? hole : *samples[args[k]]);
                    ctx.emplace(next, plug(ctx.at(cur), Tree::make(m.input()[s].symbol, std::move(kids))));
                    work.push_back(next);
                }
            }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Abstraction graph
//
// A context is summarized by (S, root look-ahead, Pos, Pos0).  S is the set
// of states that may be called on the context, computed top-down from the
// initial state; the other components only mention states of S.  (q,l) is
// in Pos iff some output path to y_l in M-hat_q(C) passes a call on a hole,
// and q is in Pos0 iff M-hat_q(C) contains a call on a hole.  Node A(q,a)
// stands for the largest number of hole calls along any path of
// M-hat_q(C), node B(q,a,l) for that number along paths to y_l.

namespace {

struct Abs {
    int set;
    int la;
    std::vector<ParamMask> pos;  // indexed like the state set
    std::vector<char> pos0;
    Tree witness;
    bool base = false;
    int offset = 0;  // first node
};

struct Layer {
    std::size_t symbol;
    std::vector<int> kids;  // >= 0 abstraction, < 0 tree of look-ahead -k-1
    int child;
};

struct GEdge {
    int to;
    bool positive;
    std::vector<int> others;
    int layer;
};

constexpr std::size_t abstraction_cap = 50000;
constexpr std::size_t node_cap = 2000000;
constexpr std::size_t set_cap = 1000;

class NestingGraph {
public:
    NestingGraph(const Mtt& m, bool multi) : m_(m), multi_(multi) {
        Q_ = static_cast<int>(m.state_count());
        R_ = std::max(0, m.max_state_rank());
        nonempty_ = m.lookahead().nonempty_states();
        samples_ = m.lookahead().sample_trees();
    }

    NestingAnalysis run();

private:
    int node_a(int a, int q) const { return abs_[a].offset + slot_[abs_[a].set][q] * (R_ + 1); }
    int node_b(int a, int q, int l) const { return node_a(a, q) + l; }
    bool in_pos(int a, int r, int l) const { return (abs_[a].pos[slot_[abs_[a].set][r]] >> l) & 1; }

    int set_id(std::vector<int> states);
    void build_sets();
    const std::vector<int>& child_sets(int set, std::size_t symbol, const std::vector<int>& bases);
    int intern(int set, int la, std::vector<ParamMask> pos, std::vector<char> pos0, const Tree& witness, bool base);
    void combine(int set, std::size_t symbol, const std::vector<int>& kids);
    void add_edge(int from, int to, bool positive, std::vector<int> others, int layer);
    Tree layer_context(const Layer& layer) const;

    const Mtt& m_;
    bool multi_;
    int Q_ = 0;
    int R_ = 0;
    std::vector<bool> nonempty_;
    std::vector<std::optional<Tree>> samples_;
    std::vector<std::vector<int>> sets_;
    std::vector<std::vector<int>> slot_;  // [set][q] -> index in the set or -1
    std::map<std::vector<int>, int> set_index_;
    std::map<std::tuple<int, std::size_t, std::vector<int>>, std::vector<int>> child_sets_;
    std::vector<Abs> abs_;
    std::map<std::tuple<int, int, std::vector<ParamMask>, std::vector<char>>, int> index_;
    std::map<std::pair<int, int>, std::vector<int>> by_set_la_;
    std::vector<int> node_abs_;
    std::vector<Layer> layers_;
    std::vector<std::vector<GEdge>> edges_;
    std::set<std::tuple<int, int, std::vector<int>>> seen_;
};

int NestingGraph::set_id(std::vector<int> states) {
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
    auto it = set_index_.find(states);
    if (it != set_index_.end()) return it->second;
    if (sets_.size() >= set_cap) throw Error(ErrorCode::not_applicable, "nesting analysis exceeds its state-set limit");
    int id = static_cast<int>(sets_.size());
    std::vector<int> slot(Q_, -1);
    for (std::size_t k = 0; k < states.size(); ++k) slot[states[k]] = static_cast<int>(k);
    slot_.push_back(std::move(slot));
    set_index_.emplace(states, id);
    sets_.push_back(std::move(states));
    return id;
}

const std::vector<int>& NestingGraph::child_sets(int set, std::size_t symbol, const std::vector<int>& bases) {
    auto key = std::make_tuple(set, symbol, bases);
    auto it = child_sets_.find(key);
    if (it != child_sets_.end()) return it->second;
    std::vector<std::vector<int>> called(bases.size());
    for (int q : sets_[set])
        for (Symbol c : calls_in(m_.rule(q, symbol, bases)))
            called[c.index() - 1].push_back(m_.call_target(c));
    std::vector<int> ids;
    for (auto& states : called) ids.push_back(states.empty() ? -1 : set_id(states));
    return child_sets_.emplace(key, std::move(ids)).first->second;
}

// Top-down closure of the relevant state sets.
void NestingGraph::build_sets() {
    set_id({m_.initial()});
    for (std::size_t s = 0; s < sets_.size(); ++s)
        for (std::size_t sym = 0; sym < m_.input().size(); ++sym) {
            int k = m_.input()[sym].rank;
            if (k == 0) continue;
            for (auto& bases : m_.lookahead().tuples(k)) {
                bool ok = true;
                for (int b : bases) ok = ok && nonempty_[b];
                if (ok) child_sets(static_cast<int>(s), sym, bases);
            }
        }
}

int NestingGraph::intern(int set, int la, std::vector<ParamMask> pos, std::vector<char> pos0, const Tree& witness,
                         bool base) {
    auto key = std::make_tuple(set, la, pos, pos0);
    auto it = index_.find(key);
    if (it != index_.end()) {
        abs_[it->second].base = abs_[it->second].base || base;
        return it->second;
    }
    if (abs_.size() >= abstraction_cap || node_abs_.size() >= node_cap)
        throw Error(ErrorCode::not_applicable, "too many context abstractions");
    int idx = static_cast<int>(abs_.size());
    index_.emplace(key, idx);
    int offset = static_cast<int>(node_abs_.size());
    abs_.push_back({set, la, std::move(pos), std::move(pos0), witness, base, offset});
    by_set_la_[{set, la}].push_back(idx);
    node_abs_.resize(node_abs_.size() + sets_[set].size() * static_cast<std::size_t>(R_ + 1), idx);
    edges_.resize(node_abs_.size());
    return idx;
}

void NestingGraph::add_edge(int from, int to, bool positive, std::vector<int> others, int layer) {
    std::sort(others.begin(), others.end());
    if (!seen_.insert({from, to, others}).second) return;
    edges_[from].push_back({to, positive, std::move(others), layer});
}

Tree NestingGraph::layer_context(const Layer& layer) const {
    std::vector<Tree> kids;
    for (std::size_t c = 0; c < layer.kids.size(); ++c) {
        int k = layer.kids[c];
        if (static_cast<int>(c) == layer.child)
            kids.push_back(Tree::make(hole_symbol()));
        else if (k >= 0)
            kids.push_back(abs_[k].witness);
        else
            kids.push_back(*samples_[-k - 1]);
    }
    return Tree::make(m_.input()[layer.symbol].symbol, std::move(kids));
}

void NestingGraph::combine(int set, std::size_t symbol, const std::vector<int>& kids) {
    std::vector<int> bases;
    std::vector<Tree> wit;
    for (int k : kids) {
        bases.push_back(k >= 0 ? abs_[k].la : -k - 1);
        wit.push_back(k >= 0 ? abs_[k].witness : *samples_[-k - 1]);
    }
    int p = m_.lookahead().next(symbol, bases);
    const std::vector<int>& states = sets_[set];

    struct Anc {
        int r;
        int child;
        int l;
    };
    auto kid_abs = [&](const Anc& a) { return kids[a.child]; };
    auto anc_in_pos = [&](const Anc& a) { return in_pos(kid_abs(a), a.r, a.l); };

    // Pass 1: the abstraction of the combined context.
    std::vector<ParamMask> pos(states.size(), 0);
    std::vector<char> pos0(states.size(), 0);
    for (std::size_t k = 0; k < states.size(); ++k) {
        std::function<void(const Tree&, std::vector<Anc>&)> walk = [&](const Tree& t, std::vector<Anc>& anc) {
            Symbol lab = t.label();
            if (lab.is_param()) {
                if (std::any_of(anc.begin(), anc.end(), anc_in_pos)) pos[k] |= ParamMask{1} << lab.index();
                return;
            }
            if (lab.kind() == SymbolKind::call && kids[lab.index() - 1] >= 0) {
                int r = m_.call_target(lab);
                int kid = kids[lab.index() - 1];
                if (abs_[kid].pos0[slot_[abs_[kid].set][r]]) pos0[k] = 1;
                for (std::size_t a = 0; a < t.arity(); ++a) {
                    anc.push_back({r, lab.index() - 1, static_cast<int>(a) + 1});
                    walk(t.child(a), anc);
                    anc.pop_back();
                }
                return;
            }
            for (const Tree& c : t.children()) walk(c, anc);
        };
        std::vector<Anc> anc;
        walk(m_.rule(states[k], symbol, bases), anc);
    }
    int a = intern(set, p, pos, pos0, Tree::make(m_.input()[symbol].symbol, wit), false);

    std::vector<int> layer_of(kids.size(), -1);
    for (std::size_t c = 0; c < kids.size(); ++c)
        if (kids[c] >= 0) {
            layer_of[c] = static_cast<int>(layers_.size());
            layers_.push_back({symbol, kids, static_cast<int>(c)});
        }

    // Pass 2: edges.
    for (int q : states) {
        auto b_node = [&](const Anc& x) { return node_b(kid_abs(x), x.r, x.l); };
        std::function<void(const Tree&, std::vector<Anc>&)> walk = [&](const Tree& t, std::vector<Anc>& anc) {
            Symbol lab = t.label();
            if (lab.is_param()) {
                for (std::size_t c = 0; c < anc.size(); ++c) {
                    std::vector<int> others;
                    bool positive = false;
                    for (std::size_t o = 0; o < anc.size(); ++o)
                        if (o != c) {
                            others.push_back(b_node(anc[o]));
                            positive = positive || anc_in_pos(anc[o]);
                        }
                    add_edge(node_b(a, q, lab.index()), b_node(anc[c]), positive, others, layer_of[anc[c].child]);
                    add_edge(node_a(a, q), b_node(anc[c]), positive, others, layer_of[anc[c].child]);
                }
                return;
            }
            if (lab.kind() == SymbolKind::call && kids[lab.index() - 1] >= 0) {
                int r = m_.call_target(lab);
                int child = lab.index() - 1;
                int kid = kids[child];
                int target_a = node_a(kid, r);
                std::vector<int> others;
                bool positive = false;
                for (const Anc& x : anc) {
                    others.push_back(b_node(x));
                    positive = positive || anc_in_pos(x);
                }
                add_edge(node_a(a, q), target_a, positive, others, layer_of[child]);
                bool self = abs_[kid].pos0[slot_[abs_[kid].set][r]];
                for (std::size_t c = 0; c < anc.size(); ++c) {
                    std::vector<int> rest{target_a};
                    bool pos_c = self;
                    for (std::size_t o = 0; o < anc.size(); ++o)
                        if (o != c) {
                            rest.push_back(b_node(anc[o]));
                            pos_c = pos_c || anc_in_pos(anc[o]);
                        }
                    add_edge(node_a(a, q), b_node(anc[c]), pos_c, rest, layer_of[anc[c].child]);
                }
                for (std::size_t x = 0; x < t.arity(); ++x) {
                    anc.push_back({r, child, static_cast<int>(x) + 1});
                    walk(t.child(x), anc);
                    anc.pop_back();
                }
                return;
            }
            for (const Tree& c : t.children()) walk(c, anc);
        };
        std::vector<Anc> anc;
        walk(m_.rule(q, symbol, bases), anc);
    }
}

NestingAnalysis NestingGraph::run() {
    const auto& la = m_.lookahead();
    int P = static_cast<int>(la.state_count());
    build_sets();
    for (std::size_t s = 0; s < sets_.size(); ++s) {
        std::vector<ParamMask> full;
        for (int q : sets_[s]) {
            ParamMask f = 0;
            for (int l = 1; l <= m_.rank(q); ++l) f |= ParamMask{1} << l;
            full.push_back(f);
        }
        for (int p = 0; p < P; ++p)
            if (nonempty_[p])
                intern(static_cast<int>(s), p, full, std::vector<char>(full.size(), 1), Tree::make(la_mark(m_, p)), true);
    }

    std::size_t done = 0;
    while (done < abs_.size()) {
        std::size_t n = abs_.size();
        for (std::size_t s = 0; s < sets_.size(); ++s)
            for (std::size_t sym = 0; sym < m_.input().size(); ++sym) {
                int k = m_.input()[sym].rank;
                if (k == 0) continue;
                for (auto& bases : la.tuples(k)) {
                    bool ok = true;
                    for (int b : bases) ok = ok && nonempty_[b];
                    if (!ok) continue;
                    const std::vector<int> req = child_sets(static_cast<int>(s), sym, bases);
                    // Options per child: the look-ahead tree, then abstractions.
                    std::vector<std::vector<int>> options(k);
                    for (int c = 0; c < k; ++c) {
                        options[c].push_back(-bases[c] - 1);
                        if (req[c] < 0) continue;
                        auto it = by_set_la_.find({req[c], bases[c]});
                        if (it == by_set_la_.end()) continue;
                        for (int x : it->second)
                            if (static_cast<std::size_t>(x) < n) options[c].push_back(x);
                    }
                    std::vector<std::size_t> digit(k, 0);
                    while (true) {
                        std::vector<int> kids;
                        int contexts = 0;
                        bool fresh = false;
                        for (int c = 0; c < k; ++c) {
                            int v = options[c][digit[c]];
                            kids.push_back(v);
                            if (v >= 0) {
                                ++contexts;
                                fresh = fresh || static_cast<std::size_t>(v) >= done;
                            }
                        }
                        if (fresh && (multi_ ? contexts >= 1 : contexts == 1)) combine(static_cast<int>(s), sym, kids);
                        int c = 0;
                        while (c < k && ++digit[c] == options[c].size()) digit[c++] = 0;
                        if (c == k) break;
                    }
                }
            }
        done = n;
    }

    NestingAnalysis result;
    result.abstractions = abs_.size();
    int N = static_cast<int>(edges_.size());
    result.nodes = static_cast<std::size_t>(N);

    // Nodes reachable from the starts: contexts at the root of the input.
    std::vector<char> reach(N, 0);
    std::deque<int> queue;
    for (std::size_t x = 0; x < abs_.size(); ++x) {
        if (abs_[x].set != 0) continue;
        int v = node_a(static_cast<int>(x), m_.initial());
        reach[v] = 1;
        queue.push_back(v);
    }
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (const GEdge& e : edges_[v]) {
            for (int w : e.others)
                if (!reach[w]) {
                    reach[w] = 1;
                    queue.push_back(w);
                }
            if (!reach[e.to]) {
                reach[e.to] = 1;
                queue.push_back(e.to);
            }
        }
    }

    // Tarjan on the reachable part.
    std::vector<int> scc(N, -1), index(N, -1), low(N, 0), stack;
    std::vector<char> on_stack(N, 0);
    int counter = 0, comps = 0;
    for (int root = 0; root < N; ++root) {
        if (!reach[root] || index[root] >= 0) continue;
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
                    scc[w] = comps;
                    if (w == v) break;
                }
                ++comps;
            }
            int fin = v;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[fin]);
        }
    }
    std::vector<std::pair<int, const GEdge*>> pumping;  // one positive edge per pumping component
    std::vector<char> comp_seen(comps, 0);
    for (int v = 0; v < N; ++v) {
        if (!reach[v]) continue;
        for (const GEdge& e : edges_[v])
            if (e.positive && scc[e.to] == scc[v] && !comp_seen[scc[v]]) {
                comp_seen[scc[v]] = 1;
                pumping.push_back({v, &e});
            }
    }

    if (!pumping.empty()) {
        result.finite = false;
        for (auto [from, pe] : pumping) {
            if (result.cycles.size() >= 4) break;
            int comp = scc[from];
            // Path pe->to ... from inside the component.
            std::map<int, std::pair<int, const GEdge*>> parent;
            std::deque<int> q{pe->to};
            parent[pe->to] = {-1, nullptr};
            while (!q.empty() && !parent.count(from)) {
                int v = q.front();
                q.pop_front();
                for (const GEdge& e : edges_[v]) {
                    if (scc[e.to] != comp || parent.count(e.to)) continue;
                    parent[e.to] = {v, &e};
                    q.push_back(e.to);
                }
            }
            std::vector<const GEdge*> cycle{pe};
            std::vector<const GEdge*> back;
            for (int v = from; parent[v].second; v = parent[v].first) back.push_back(parent[v].second);
            std::reverse(back.begin(), back.end());
            cycle.insert(cycle.end(), back.begin(), back.end());
            Tree ctx = Tree::make(hole_symbol());
            for (const GEdge* e : cycle) ctx = plug(ctx, layer_context(layers_[e->layer]));
            result.cycles.push_back({ctx, abs_[node_abs_[from]].la});
        }
        return result;
    }

    // Longest weighted paths (finite since no positive cycle is reachable).
    std::vector<long> val(N, 0);
    for (int v = 0; v < N; ++v) {
        if (!reach[v]) continue;
        int a = node_abs_[v];
        int rest = v - abs_[a].offset;
        int q = sets_[abs_[a].set][rest / (R_ + 1)], l = rest % (R_ + 1);
        if (abs_[a].base && l <= m_.rank(q)) val[v] = 1;
    }
    std::size_t cap = 20 * static_cast<std::size_t>(N) + 100;
    for (std::size_t pass = 0;; ++pass) {
        if (pass > cap) throw Error(ErrorCode::internal, "nesting bound does not converge");
        bool changed = false;
        for (int v = 0; v < N; ++v) {
            if (!reach[v]) continue;
            for (const GEdge& e : edges_[v]) {
                long c = val[e.to];
                for (int w : e.others) c += val[w];
                if (c > val[v]) {
                    val[v] = c;
                    changed = true;
                }
            }
        }
        if (!changed) break;
    }
    for (std::size_t x = 0; x < abs_.size(); ++x)
        if (abs_[x].set == 0) result.bound = std::max(result.bound, val[node_a(static_cast<int>(x), m_.initial())]);
    return result;
}

// ---------------------------------------------------------------------------
// Loop search
//
// A context is read from the root down as a sequence of layers
// sigma(t1, .., Y, .., tk).  Loop conditions are followed by threads that
// step through the same layers: a state r stands for a call r(Y) whose
// expansion must contain a call on the final hole, a pair (r,l) for the
// parameter y_l of such a call, which must end up below a call on the
// final hole.

struct CallAnc {
    int child;  // 0-based
    int state;
    int arg;  // 1-based argument entered; 0 for the call itself
};

struct RhsShape {
    // y_l with its call ancestors, outermost first.
    std::vector<std::pair<int, std::vector<CallAnc>>> params;
    std::vector<std::pair<CallAnc, std::vector<CallAnc>>> calls;
};

RhsShape shape_of(const Mtt& m, const Tree& rhs) {
    RhsShape out;
    std::vector<CallAnc> anc;
    std::function<void(const Tree&)> walk = [&](const Tree& t) {
        Symbol lab = t.label();
        if (lab.is_param()) {
            out.params.push_back({lab.index(), anc});
            return;
        }
        if (lab.kind() == SymbolKind::call) {
            CallAnc self{lab.index() - 1, m.call_target(lab), 0};
            out.calls.push_back({self, anc});
            for (std::size_t a = 0; a < t.arity(); ++a) {
                anc.push_back({self.child, self.state, static_cast<int>(a) + 1});
                walk(t.child(a));
                anc.pop_back();
            }
            return;
        }
        for (const Tree& c : t.children()) walk(c);
    };
    walk(rhs);
    return out;
}

// Strongly connected components; cyclic[c] is set when component c
// contains a cycle.
std::vector<int> components(const std::vector<std::vector<int>>& adj, std::vector<char>& cyclic) {
    int n = static_cast<int>(adj.size());
    std::vector<int> comp(n, -1), index(n, -1), low(n, 0), stack;
    std::vector<char> on_stack(n, 0);
    int counter = 0, comps = 0;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        std::vector<std::pair<int, std::size_t>> work{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!work.empty()) {
            auto& [v, next] = work.back();
            if (next < adj[v].size()) {
                int w = adj[v][next++];
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
            int fin = v;
            if (low[v] == index[v]) {
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = comps;
                    if (w == fin) break;
                }
                ++comps;
            }
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[fin]);
        }
    }
    std::vector<int> size(comps, 0);
    for (int v = 0; v < n; ++v) ++size[comp[v]];
    cyclic.assign(comps, 0);
    for (int v = 0; v < n; ++v) {
        if (size[comp[v]] > 1) cyclic[comp[v]] = 1;
        for (int w : adj[v])
            if (w == v) cyclic[comp[v]] = 1;
    }
    return comp;
}

class LoopSearch {
public:
    explicit LoopSearch(const Mtt& m);
    std::optional<GeneratorLoop> nesting();
    std::optional<GeneratorLoop> ml();

private:
    struct Layer {
        std::size_t symbol;
        std::vector<int> bases;
        int c;        // child on the path
        int c2 = -1;  // branching layers: child holding X2
    };
    // Search node: look-ahead of the current hole, the self-nesting thread
    // (or -1) and a tracker (kind, x, y).
    struct Node {
        int la, phi, kind, x, y;
    };
    static std::uint64_t key(const Node& n) {
        return (std::uint64_t(n.la) << 52) | (std::uint64_t(n.phi + 1) << 36) | (std::uint64_t(n.kind) << 32) |
               (std::uint64_t(n.x + 1) << 16) | std::uint64_t(n.y + 1);
    }

    const RhsShape& shape(int r, const Layer& layer);
    std::vector<int> r0(int r, const Layer& l, int c);
    std::vector<int> r1(int pr, const Layer& l, int c);
    int pair(int r, int l) const { return pair_id_[r][l]; }
    int node0(int la, int r) const { return la * Q_ + r; }
    int node1(int la, int pr) const { return la * NP_ + pr; }

    // Breadth-first search from `start`; returns the layers from the root
    // down when `done` accepts a node.
    template <class Expand, class Done>
    std::optional<std::vector<const Layer*>> bfs(const Node& start, Expand&& expand, Done&& done);

    Tree single_context(const std::vector<const Layer*>& layers) const;
    Tree double_context(const std::vector<const Layer*>& layers) const;

    const Mtt& m_;
    int Q_ = 0;
    int P_ = 0;
    int NP_ = 0;
    std::vector<bool> nonempty_;
    std::vector<std::optional<Tree>> samples_;
    std::set<std::pair<int, int>> reach_;
    std::vector<std::vector<int>> pair_id_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<std::vector<Layer>> layers_;    // by root look-ahead
    std::vector<std::vector<Layer>> branches_;  // by root look-ahead
    std::map<std::tuple<int, std::size_t, std::vector<int>>, RhsShape> shapes_;
    std::vector<int> scc0_, scc1_;
    std::vector<char> cyc0_, cyc1_;
};

LoopSearch::LoopSearch(const Mtt& m) : m_(m) {
    Q_ = static_cast<int>(m.state_count());
    P_ = static_cast<int>(m.la_count());
    nonempty_ = m.lookahead().nonempty_states();
    samples_ = m.lookahead().sample_trees();
    reach_ = reachable_calls(m);
    pair_id_.assign(Q_, {});
    for (int q = 0; q < Q_; ++q) {
        pair_id_[q].assign(m.rank(q) + 1, -1);
        for (int l = 1; l <= m.rank(q); ++l) {
            pair_id_[q][l] = static_cast<int>(pairs_.size());
            pairs_.push_back({q, l});
        }
    }
    NP_ = static_cast<int>(pairs_.size());
    if (Q_ >= 0xffff || NP_ >= 0xffff || P_ >= 0xfff) throw Error(ErrorCode::not_applicable, "transducer too large for the loop search");
    layers_.assign(P_, {});
    branches_.assign(P_, {});
    const auto& in = m.input();
    for (std::size_t s = 0; s < in.size(); ++s) {
        int k = in[s].rank;
        if (k == 0) continue;
        for (auto& bases : m.lookahead().tuples(k)) {
            if (!std::all_of(bases.begin(), bases.end(), [&](int b) { return nonempty_[b]; })) continue;
            int root = m.lookahead().next(s, bases);
            for (int c = 0; c < k; ++c) {
                layers_[root].push_back({s, bases, c, -1});
                for (int c2 = 0; c2 < k; ++c2)
                    if (c2 != c) branches_[root].push_back({s, bases, c, c2});
            }
        }
    }
    std::vector<std::vector<int>> adj0(static_cast<std::size_t>(P_ * Q_)), adj1(static_cast<std::size_t>(P_ * NP_));
    for (int la = 0; la < P_; ++la)
        for (const Layer& l : layers_[la]) {
            int down = l.bases[l.c];
            for (int r = 0; r < Q_; ++r)
                for (int r2 : r0(r, l, l.c)) adj0[node0(la, r)].push_back(node0(down, r2));
            for (int pr = 0; pr < NP_; ++pr)
                for (int p2 : r1(pr, l, l.c)) adj1[node1(la, pr)].push_back(node1(down, p2));
        }
    scc0_ = components(adj0, cyc0_);
    scc1_ = components(adj1, cyc1_);
}

const RhsShape& LoopSearch::shape(int r, const Layer& layer) {
    auto key = std::make_tuple(r, layer.symbol, layer.bases);
    auto it = shapes_.find(key);
    if (it != shapes_.end()) return it->second;
    return shapes_.emplace(key, shape_of(m_, m_.rule(r, layer.symbol, layer.bases))).first->second;
}

std::vector<int> LoopSearch::r0(int r, const Layer& l, int c) {
    std::vector<int> out;
    for (const auto& [call, anc] : shape(r, l).calls)
        if (call.child == c) out.push_back(call.state);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<int> LoopSearch::r1(int pr, const Layer& l, int c) {
    auto [r, y] = pairs_[pr];
    std::vector<int> out;
    for (const auto& [idx, anc] : shape(r, l).params)
        if (idx == y)
            for (const CallAnc& a : anc)
                if (a.child == c) out.push_back(pair(a.state, a.arg));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

template <class Expand, class Done>
std::optional<std::vector<const LoopSearch::Layer*>> LoopSearch::bfs(const Node& start, Expand&& expand, Done&& done) {
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, const Layer*>> parent;
    std::deque<Node> queue{start};
    parent.emplace(key(start), std::make_pair(~std::uint64_t{0}, nullptr));
    while (!queue.empty()) {
        Node n = queue.front();
        queue.pop_front();
        if (done(n)) {
            std::vector<const Layer*> out;
            for (std::uint64_t k = key(n); parent.at(k).second; k = parent.at(k).first) out.push_back(parent.at(k).second);
            std::reverse(out.begin(), out.end());
            return out;
        }
        expand(n, [&](const Node& next, const Layer* via) {
            if (parent.emplace(key(next), std::make_pair(key(n), via)).second) queue.push_back(next);
        });
    }
    return std::nullopt;
}

Tree LoopSearch::single_context(const std::vector<const Layer*>& layers) const {
    Tree t = Tree::make(hole_mark(0));
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        const Layer& l = **it;
        std::vector<Tree> kids;
        for (std::size_t c = 0; c < l.bases.size(); ++c)
            kids.push_back(static_cast<int>(c) == l.c ? t : *samples_[l.bases[c]]);
        t = Tree::make(m_.input()[l.symbol].symbol, std::move(kids));
    }
    return t;
}

Tree LoopSearch::double_context(const std::vector<const Layer*>& layers) const {
    Tree t = Tree::make(hole_mark(1));
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        const Layer& l = **it;
        std::vector<Tree> kids;
        for (std::size_t c = 0; c < l.bases.size(); ++c) {
            if (static_cast<int>(c) == l.c)
                kids.push_back(t);
            else if (static_cast<int>(c) == l.c2)
                kids.push_back(Tree::make(hole_mark(2)));
            else
                kids.push_back(*samples_[l.bases[c]]);
        }
        t = Tree::make(m_.input()[l.symbol].symbol, std::move(kids));
    }
    return t;
}

// Trackers of the generator condition, single hole:
//   0 same(r)          both target calls still come from one call r(Y)
//   1 split(t, g)      t = pair heading for (q,i), g = state heading for q0
//   2 same(pr)         the tracked y_j occurrence lies in the expansion of pr
//   3 split(g, t)      g = pair heading for (q0,j), t = pair heading for (q,i)
std::optional<GeneratorLoop> LoopSearch::nesting() {
    for (int p = 0; p < P_; ++p) {
        if (!nonempty_[p]) continue;
        for (int q = 0; q < Q_; ++q) {
            if (!reach_.count({q, p})) continue;
            for (int i = 1; i <= m_.rank(q); ++i) {
                int qi = pair(q, i);
                int phi_comp = scc1_[node1(p, qi)];
                if (!cyc1_[phi_comp]) continue;
                for (int q0 = 0; q0 < Q_; ++q0) {
                    if (!reach_.count({q0, p})) continue;
                    for (int j = 0; j <= m_.rank(q0); ++j) {
                        int gen_comp = j == 0 ? scc0_[node0(p, q0)] : scc1_[node1(p, pair(q0, j))];
                        if (!(j == 0 ? cyc0_ : cyc1_)[gen_comp]) continue;
                        int q0j = j == 0 ? -1 : pair(q0, j);
                        auto in_gen = [&](int la, int v) {
                            return j == 0 ? scc0_[node0(la, v)] == gen_comp : scc1_[node1(la, v)] == gen_comp;
                        };
                        auto expand = [&](const Node& n, auto&& emit) {
                            for (const Layer& l : layers_[n.la]) {
                                int down = l.bases[l.c];
                                std::vector<int> phis;
                                for (int f : r1(n.phi, l, l.c))
                                    if (scc1_[node1(down, f)] == phi_comp) phis.push_back(f);
                                if (phis.empty()) continue;
                                std::vector<Node> next;
                                if (n.kind == 0) {
                                    for (int r : r0(n.x, l, l.c))
                                        if (in_gen(down, r)) next.push_back({down, 0, 0, r, -1});
                                    for (const auto& [call, anc] : shape(n.x, l).calls) {
                                        if (call.child != l.c || !in_gen(down, call.state)) continue;
                                        for (const CallAnc& a : anc)
                                            if (a.child == l.c) next.push_back({down, 0, 1, pair(a.state, a.arg), call.state});
                                    }
                                } else if (n.kind == 1) {
                                    for (int t : r1(n.x, l, l.c))
                                        for (int g : r0(n.y, l, l.c))
                                            if (in_gen(down, g)) next.push_back({down, 0, 1, t, g});
                                } else if (n.kind == 2) {
                                    for (int g : r1(n.x, l, l.c))
                                        if (in_gen(down, g)) next.push_back({down, 0, 2, g, -1});
                                    auto [r, y] = pairs_[n.x];
                                    for (const auto& [idx, anc] : shape(r, l).params) {
                                        if (idx != y) continue;
                                        for (std::size_t u = 0; u < anc.size(); ++u)
                                            for (std::size_t v = 0; v < anc.size(); ++v) {
                                                if (u == v || anc[u].child != l.c || anc[v].child != l.c) continue;
                                                int g = pair(anc[u].state, anc[u].arg);
                                                if (in_gen(down, g)) next.push_back({down, 0, 3, g, pair(anc[v].state, anc[v].arg)});
                                            }
                                    }
                                } else {
                                    for (int g : r1(n.x, l, l.c))
                                        if (in_gen(down, g))
                                            for (int t : r1(n.y, l, l.c)) next.push_back({down, 0, 3, g, t});
                                }
                                for (Node& x : next)
                                    for (int f : phis) {
                                        x.phi = f;
                                        emit(x, &l);
                                    }
                            }
                        };
                        auto done = [&](const Node& n) {
                            if (n.la != p || n.phi != qi) return false;
                            if (n.kind == 1) return n.x == qi && n.y == q0;
                            if (n.kind == 3) return n.x == q0j && n.y == qi;
                            return false;
                        };
                        Node start{p, qi, j == 0 ? 0 : 2, j == 0 ? q0 : q0j, -1};
                        auto layers = bfs(start, expand, done);
                        if (!layers) continue;
                        GeneratorLoop loop;
                        loop.kind = LoopKind::nesting;
                        loop.context = single_context(*layers);
                        loop.la = p;
                        loop.q0 = q0;
                        loop.q = q;
                        loop.i = i;
                        loop.j = j;
                        loop.prefix = *call_context(m_, q0, p);
                        if (!is_nesting_loop(m_, loop)) throw Error(ErrorCode::internal, "loop search produced an invalid nesting loop");
                        return loop;
                    }
                }
            }
        }
    }
    return std::nullopt;
}

// Trackers of the ML condition, read down the path to X1; exactly one
// branching layer puts X2 next to the path:
//   0 same(r)   1 split(t pair, g state)   2 after(g state)
//   3 same(pr)  4 split(t pair, g pair)    5 after(g pair)
std::optional<GeneratorLoop> LoopSearch::ml() {
    for (int p0 = 0; p0 < P_; ++p0) {
        if (!nonempty_[p0]) continue;
        for (int q0 = 0; q0 < Q_; ++q0) {
            if (!reach_.count({q0, p0})) continue;
            for (int j = 0; j <= m_.rank(q0); ++j) {
                int gen_comp = j == 0 ? scc0_[node0(p0, q0)] : scc1_[node1(p0, pair(q0, j))];
                if (!(j == 0 ? cyc0_ : cyc1_)[gen_comp]) continue;
                int q0j = j == 0 ? -1 : pair(q0, j);
                auto in_gen = [&](int la, int v) {
                    return j == 0 ? scc0_[node0(la, v)] == gen_comp : scc1_[node1(la, v)] == gen_comp;
                };
                auto expand = [&](const Node& n, auto&& emit) {
                    for (const Layer& l : layers_[n.la]) {
                        int down = l.bases[l.c];
                        auto put = [&](int kind, int x, int y) { emit(Node{down, -1, kind, x, y}, &l); };
                        switch (n.kind) {
                            case 0:
                                for (int r : r0(n.x, l, l.c))
                                    if (in_gen(down, r)) put(0, r, -1);
                                for (const auto& [call, anc] : shape(n.x, l).calls) {
                                    if (call.child != l.c || !in_gen(down, call.state)) continue;
                                    for (const CallAnc& a : anc)
                                        if (a.child == l.c) put(1, pair(a.state, a.arg), call.state);
                                }
                                break;
                            case 1:
                                for (int t : r1(n.x, l, l.c))
                                    for (int g : r0(n.y, l, l.c))
                                        if (in_gen(down, g)) put(1, t, g);
                                break;
                            case 2:
                                for (int g : r0(n.x, l, l.c))
                                    if (in_gen(down, g)) put(2, g, -1);
                                break;
                            case 3: {
                                for (int g : r1(n.x, l, l.c))
                                    if (in_gen(down, g)) put(3, g, -1);
                                auto [r, y] = pairs_[n.x];
                                for (const auto& [idx, anc] : shape(r, l).params) {
                                    if (idx != y) continue;
                                    for (std::size_t u = 0; u < anc.size(); ++u)
                                        for (std::size_t v = 0; v < anc.size(); ++v) {
                                            if (u == v || anc[u].child != l.c || anc[v].child != l.c) continue;
                                            int g = pair(anc[v].state, anc[v].arg);
                                            if (in_gen(down, g)) put(4, pair(anc[u].state, anc[u].arg), g);
                                        }
                                }
                                break;
                            }
                            case 4:
                                for (int t : r1(n.x, l, l.c))
                                    for (int g : r1(n.y, l, l.c))
                                        if (in_gen(down, g)) put(4, t, g);
                                break;
                            default:
                                for (int g : r1(n.x, l, l.c))
                                    if (in_gen(down, g)) put(5, g, -1);
                        }
                    }
                    if (n.kind == 2 || n.kind == 5) return;
                    for (const Layer& l : branches_[n.la]) {
                        int down = l.bases[l.c];
                        auto put = [&](int kind, int x) { emit(Node{down, -1, kind, x, -1}, &l); };
                        switch (n.kind) {
                            case 0:
                                for (const auto& [call, anc] : shape(n.x, l).calls) {
                                    if (call.child != l.c || !in_gen(down, call.state)) continue;
                                    if (std::any_of(anc.begin(), anc.end(), [&](const CallAnc& a) { return a.child == l.c2; }))
                                        put(2, call.state);
                                }
                                break;
                            case 1:
                                if (r1(n.x, l, l.c2).empty()) break;
                                for (int g : r0(n.y, l, l.c))
                                    if (in_gen(down, g)) put(2, g);
                                break;
                            case 3: {
                                auto [r, y] = pairs_[n.x];
                                for (const auto& [idx, anc] : shape(r, l).params) {
                                    if (idx != y) continue;
                                    bool x2 = std::any_of(anc.begin(), anc.end(), [&](const CallAnc& a) { return a.child == l.c2; });
                                    if (!x2) continue;
                                    for (const CallAnc& a : anc)
                                        if (a.child == l.c && in_gen(down, pair(a.state, a.arg))) put(5, pair(a.state, a.arg));
                                }
                                break;
                            }
                            case 4:
                                if (r1(n.x, l, l.c2).empty()) break;
                                for (int g : r1(n.y, l, l.c))
                                    if (in_gen(down, g)) put(5, g);
                                break;
                            default:
                                break;
                        }
                    }
                };
                auto done = [&](const Node& n) {
                    if (n.la != p0) return false;
                    return (n.kind == 2 && n.x == q0) || (n.kind == 5 && n.x == q0j);
                };
                Node start{p0, -1, j == 0 ? 0 : 3, j == 0 ? q0 : q0j, -1};
                auto layers = bfs(start, expand, done);
                if (!layers) continue;
                GeneratorLoop loop;
                loop.kind = LoopKind::ml_nesting;
                loop.context = double_context(*layers);
                loop.la0 = p0;
                loop.q0 = q0;
                loop.j = j;
                loop.prefix = *call_context(m_, q0, p0);
                for (const Layer* l : *layers)
                    if (l->c2 >= 0) loop.la = l->bases[l->c2];
                for (int q = 0; q < Q_; ++q)
                    for (int i = 1; i <= m_.rank(q); ++i) {
                        loop.q = q;
                        loop.i = i;
                        if (is_ml_nesting_loop(m_, loop)) return loop;
                    }
                throw Error(ErrorCode::internal, "loop search produced an invalid ML-nesting loop");
            }
        }
    }
    return std::nullopt;
}

// Largest number of nested calls on marked leaves along one output path,
// over small inputs with one marked leaf (or any number of them).
long measured_nesting(const Mtt& m, bool multi) {
    auto nonempty = m.lookahead().nonempty_states();
    RankedAlphabet alpha = m.input();
    std::map<Symbol, int> marks;
    for (std::size_t p = 0; p < m.la_count(); ++p)
        if (nonempty[p]) {
            Symbol s = la_mark(m, static_cast<int>(p));
            alpha.add(s, 0);
            marks.emplace(s, static_cast<int>(p));
        }
    std::function<long(const Tree&)> depth = [&](const Tree& t) -> long {
        long best = 0;
        for (const Tree& c : t.children()) best = std::max(best, depth(c));
        return best + (t.label().kind() == SymbolKind::mark_call ? 1 : 0);
    };
    long best = 0;
    std::vector<Tree> inputs;
    for (std::size_t size = 1; size <= 7; ++size) {
        auto more = enumerate_trees(alpha, size);
        if (more.size() > 3000 && size > 2) break;
        inputs = std::move(more);
    }
    Evaluator ev(m, marks);
    for (const Tree& s : inputs) {
        std::uint64_t holes = 0;
        for (auto& [sym, p] : marks) holes += count_label(s, sym);
        if (holes == 0 || (!multi && holes != 1)) continue;
        Tree out = ev.apply(s);
        if (out.size() > output_cap) continue;
        best = std::max(best, depth(out));
    }
    return best;
}

}  // namespace

NestingAnalysis analyze_nesting(const Mtt& m, bool multi_leaf) {
    require_valid(m);
    return NestingGraph(m, multi_leaf).run();
}

std::optional<GeneratorLoop> find_nesting_loop(const Mtt& m) {
    require_valid(m);
    return LoopSearch(m).nesting();
}

std::optional<GeneratorLoop> find_ml_nesting_loop(const Mtt& m) {
    require_valid(m);
    return LoopSearch(m).ml();
}

Tree pumped_input(const Mtt& m, const GeneratorLoop& loop, int k) {
    auto samples = m.lookahead().sample_trees();
    PoutAnalysis analysis(m);
    PoutResult r = analysis.pout_finite(loop.q, loop.i, loop.la);
    Tree t = r.witness ? r.witness->pumped(k) : *samples[loop.la];
    Tree t0 = loop.kind == LoopKind::ml_nesting ? *samples[loop.la0] : Tree();
    return loop.instance(k, t, t0);
}

namespace {

DecisionReport decide(const Mtt& m, int max_iters, bool multi) {
    using clock = std::chrono::steady_clock;
    DecisionReport report;
    auto t0 = clock::now();
    NormalizeResult norm = depth_proper(m, max_iters);
    auto t1 = clock::now();
    report.normalized = norm.mtt;
    report.iterations = norm.iterations;
    report.rhs_height = norm.mtt.max_rhs_height();
    const Mtt& n = report.normalized;

    LoopSearch search(n);
    report.loop = search.nesting();
    if (!report.loop && multi) report.loop = search.ml();
    report.verdict = !report.loop;
    if (report.verdict) {
        try {
            NestingAnalysis analysis = analyze_nesting(n, multi);
            if (!analysis.finite) throw Error(ErrorCode::internal, "nesting analysis disagrees with the loop search");
            report.nesting_bound = analysis.bound;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::not_applicable) throw;
            report.nesting_bound = measured_nesting(n, multi);
            report.bound_exact = false;
        }
        report.factor = report.nesting_bound * report.rhs_height + 1;
    }
    auto t2 = clock::now();
    report.normalize_seconds = std::chrono::duration<double>(t1 - t0).count();
    report.decide_seconds = std::chrono::duration<double>(t2 - t1).count();
    return report;
}

}  // namespace

DecisionReport decide_lshi(const Mtt& m, int max_iters) { return decide(m, max_iters, false); }
DecisionReport decide_lhi(const Mtt& m, int max_iters) { return decide(m, max_iters, true); }

}  // namespace mttlab
