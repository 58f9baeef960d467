#include "mttlab/automaton.hpp"

#include <algorithm>
#include <unordered_map>

namespace mttlab {

TreeAutomaton::TreeAutomaton(RankedAlphabet alphabet, std::vector<std::string> states)
    : alphabet_(std::move(alphabet)), names_(std::move(states)) {
    if (names_.empty()) throw Error(ErrorCode::invalid_transducer, "automaton without states");
    for (std::size_t i = 0; i < names_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (names_[i] == names_[j])
                throw Error(ErrorCode::invalid_transducer, "duplicate state " + names_[i]);
    table_.resize(alphabet_.size());
    for (std::size_t s = 0; s < alphabet_.size(); ++s) {
        std::size_t n = 1;
        for (int k = 0; k < alphabet_[s].rank; ++k) n *= names_.size();
        table_[s].assign(n, -1);
    }
}

std::size_t TreeAutomaton::tuple_index(const std::vector<int>& args) const {
    std::size_t idx = 0;
    for (int a : args) idx = idx * names_.size() + static_cast<std::size_t>(a);
    return idx;
}

std::vector<std::vector<int>> TreeAutomaton::tuples(int k) const {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(static_cast<std::size_t>(k), 0);
    int n = static_cast<int>(names_.size());
    while (true) {
        out.push_back(cur);
        int pos = k - 1;
        while (pos >= 0 && ++cur[pos] == n) cur[pos--] = 0;
        if (pos < 0) break;
    }
    return out;
}

void TreeAutomaton::set(Symbol symbol, const std::vector<int>& args, int target) {
    auto s = alphabet_.find(symbol);
    if (!s) throw Error(ErrorCode::unknown_symbol, "unknown input symbol " + symbol.text());
    if (static_cast<int>(args.size()) != alphabet_[*s].rank)
        throw Error(ErrorCode::invalid_transducer,
                    "transition for " + symbol.text() + " has wrong arity");
    for (int a : args)
        if (a < 0 || a >= static_cast<int>(names_.size()))
            throw Error(ErrorCode::invalid_transducer, "bad state index");
    if (target < 0 || target >= static_cast<int>(names_.size()))
        throw Error(ErrorCode::invalid_transducer, "bad state index");
    table_[*s][tuple_index(args)] = target;
}

void TreeAutomaton::set(std::string_view symbol, const std::vector<std::string>& args,
                        const std::string& target) {
    std::vector<int> ids;
    for (auto& a : args) ids.push_back(state(a));
    set(Symbol::intern(symbol), ids, state(target));
}

bool TreeAutomaton::defined(std::size_t symbol, const std::vector<int>& args) const {
    return table_[symbol][tuple_index(args)] >= 0;
}

std::vector<std::string> TreeAutomaton::missing() const {
    std::vector<std::string> out;
    for (std::size_t s = 0; s < alphabet_.size(); ++s) {
        for (auto& args : tuples(alphabet_[s].rank)) {
            if (table_[s][tuple_index(args)] >= 0) continue;
            std::string key = alphabet_[s].symbol.text();
            if (!args.empty()) {
                key += "(";
                for (std::size_t i = 0; i < args.size(); ++i) {
                    if (i) key += ",";
                    key += names_[args[i]];
                }
                key += ")";
            }
            out.push_back(key);
        }
    }
    return out;
}

void TreeAutomaton::finish() {
    auto miss = missing();
    if (!miss.empty())
        throw Error(ErrorCode::invalid_transducer, "look-ahead transition undefined for " + miss[0]);
}

TreeAutomaton TreeAutomaton::trivial(const RankedAlphabet& alphabet, const std::string& state) {
    TreeAutomaton a(alphabet, {state});
    for (auto& t : a.table_) std::fill(t.begin(), t.end(), 0);
    return a;
}

std::optional<int> TreeAutomaton::find_state(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return static_cast<int>(i);
    return std::nullopt;
}

int TreeAutomaton::state(std::string_view name) const {
    auto p = find_state(name);
    if (!p) throw Error(ErrorCode::unknown_symbol, "unknown look-ahead state " + std::string(name));
    return *p;
}

int TreeAutomaton::next(std::size_t symbol, const std::vector<int>& args) const {
    return table_[symbol][tuple_index(args)];
}

static int run_rec(const TreeAutomaton& a, const Tree& s, const std::map<Symbol, int>& marks,
                   std::unordered_map<const detail::Node*, int>& memo) {
    auto hit = memo.find(s.node());
    if (hit != memo.end()) return hit->second;
    int out;
    if (s.label().kind() == SymbolKind::mark) {
        auto m = marks.find(s.label());
        if (m != marks.end()) {
            out = m->second;
        } else {
            auto p = a.find_state(s.label().mark_name());
            if (!p) throw Error(ErrorCode::unknown_symbol, "unknown mark " + s.label().text());
            out = *p;
        }
    } else {
        auto idx = a.alphabet().find(s.label());
        if (!idx || a.alphabet()[*idx].rank != static_cast<int>(s.arity()))
            throw Error(ErrorCode::unknown_symbol,
                        "symbol " + s.label().text() + "/" + std::to_string(s.arity()) +
                            " is not in the input alphabet");
        std::vector<int> args;
        args.reserve(s.arity());
        for (const Tree& c : s.children()) args.push_back(run_rec(a, c, marks, memo));
        out = a.next(*idx, args);
    }
    memo.emplace(s.node(), out);
    return out;
}

int TreeAutomaton::run(const Tree& s, const std::map<Symbol, int>& marks) const {
    std::unordered_map<const detail::Node*, int> memo;
    return run_rec(*this, s, marks, memo);
}

std::vector<std::optional<Tree>> TreeAutomaton::sample_trees() const {
    std::vector<std::optional<Tree>> best(names_.size());
    bool changed = true;
    while (changed) {
        changed = false;
        // One round adds witnesses of the next height only.
        std::vector<std::optional<Tree>> found = best;
        for (std::size_t s = 0; s < alphabet_.size(); ++s) {
            for (auto& args : tuples(alphabet_[s].rank)) {
                int target = table_[s][tuple_index(args)];
                if (target < 0 || found[target]) continue;
                bool ok = std::all_of(args.begin(), args.end(),
                                      [&](int a) { return best[a].has_value(); });
                if (!ok) continue;
                std::vector<Tree> kids;
                for (int a : args) kids.push_back(*best[a]);
                found[target] = Tree::make(alphabet_[s].symbol, std::move(kids));
                changed = true;
            }
        }
        best = std::move(found);
    }
    return best;
}

std::optional<Tree> TreeAutomaton::sample_tree(int p) const { return sample_trees()[p]; }

std::vector<bool> TreeAutomaton::nonempty_states() const {
    std::vector<bool> ne(names_.size(), false);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s = 0; s < alphabet_.size(); ++s)
            for (auto& args : tuples(alphabet_[s].rank)) {
                int target = table_[s][tuple_index(args)];
                if (target < 0 || ne[target]) continue;
                if (std::all_of(args.begin(), args.end(), [&](int a) { return ne[a]; })) {
                    ne[target] = true;
                    changed = true;
                }
            }
    }
    return ne;
}

namespace {

// Splits `total` into `parts` positive summands, calling f for each split.
template <class F>
void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& cur, F&& f) {
    if (parts == 0) {
        if (total == 0) f(cur);
        return;
    }
    for (std::size_t first = 1; first + (parts - 1) <= total; ++first) {
        cur.push_back(first);
        compositions(total - first, parts - 1, cur, f);
        cur.pop_back();
    }
}

void sort_printed(std::vector<Tree>& v) {
    std::vector<std::pair<std::string, Tree>> keyed;
    keyed.reserve(v.size());
    for (const Tree& t : v) keyed.emplace_back(to_string(t), t);
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = keyed[i].second;
}

}  // namespace

std::vector<std::vector<Tree>> TreeAutomaton::enumerate_all(std::size_t max_size) const {
    // by_size[n][p] = members of L_p with exactly n nodes.
    std::vector<std::vector<std::vector<Tree>>> by_size(
        max_size + 1, std::vector<std::vector<Tree>>(names_.size()));
    std::size_t np = names_.size();
    for (std::size_t n = 1; n <= max_size; ++n) {
        for (std::size_t s = 0; s < alphabet_.size(); ++s) {
            int k = alphabet_[s].rank;
            Symbol sym = alphabet_[s].symbol;
            if (k == 0) {
                if (n == 1) by_size[1][table_[s][0]].push_back(Tree::make(sym));
                continue;
            }
            std::vector<std::size_t> split;
            compositions(n - 1, static_cast<std::size_t>(k), split,
                         [&](const std::vector<std::size_t>& sizes) {
                             // Per child: every (state, member) of the requested size.
                             std::vector<std::vector<std::pair<int, Tree>>> pools(sizes.size());
                             for (std::size_t i = 0; i < sizes.size(); ++i)
                                 for (std::size_t p = 0; p < np; ++p)
                                     for (const Tree& t : by_size[sizes[i]][p])
                                         pools[i].emplace_back(static_cast<int>(p), t);
                             for (auto& pool : pools)
                                 if (pool.empty()) return;
                             std::vector<std::size_t> pick(sizes.size(), 0);
                             while (true) {
                                 std::vector<Tree> kids;
                                 std::vector<int> args;
                                 for (std::size_t i = 0; i < pick.size(); ++i) {
                                     args.push_back(pools[i][pick[i]].first);
                                     kids.push_back(pools[i][pick[i]].second);
                                 }
                                 by_size[n][table_[s][tuple_index(args)]].push_back(
                                     Tree::make(sym, std::move(kids)));
                                 std::size_t pos = pick.size();
                                 while (pos > 0 && ++pick[pos - 1] == pools[pos - 1].size())
                                     pick[--pos] = 0;
                                 if (pos == 0) return;
                             }
                         });
        }
        for (auto& v : by_size[n]) sort_printed(v);
    }
    std::vector<std::vector<Tree>> out(np);
    for (std::size_t n = 1; n <= max_size; ++n)
        for (std::size_t p = 0; p < np; ++p)
            out[p].insert(out[p].end(), by_size[n][p].begin(), by_size[n][p].end());
    return out;
}

std::vector<Tree> TreeAutomaton::enumerate_trees(int p, std::size_t max_size) const {
    return enumerate_all(max_size)[p];
}

std::vector<Tree> enumerate_trees(const RankedAlphabet& alphabet, std::size_t max_size) {
    auto all = TreeAutomaton::trivial(alphabet).enumerate_all(max_size);
    return all[0];
}

}  // namespace mttlab
