#pragma once

// Reference implementations used as test oracles.  Plain value trees, no
// sharing, no memoization.

#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mttlab/mtt.hpp"

namespace oracle {

struct NTree {
    std::string label;
    std::vector<NTree> kids;
    friend bool operator==(const NTree&, const NTree&) = default;
    friend auto operator<=>(const NTree&, const NTree&) = default;
};

inline std::string show(const NTree& t) {
    std::string out = t.label;
    if (!t.kids.empty()) {
        out += "(";
        for (std::size_t i = 0; i < t.kids.size(); ++i) {
            if (i) out += ", ";
            out += show(t.kids[i]);
        }
        out += ")";
    }
    return out;
}

namespace detail {
struct Reader {
    std::string_view s;
    std::size_t k = 0;
    void skip() {
        while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
    }
    NTree tree() {
        skip();
        NTree t;
        std::size_t start = k;
        if (k < s.size() && (s[k] == '<' || s[k] == '{')) {
            char close = s[k] == '<' ? '>' : '}';
            while (k < s.size() && s[k] != close) ++k;
            ++k;
        } else {
            while (k < s.size() && s[k] != '(' && s[k] != ')' && s[k] != ',' &&
                   !std::isspace(static_cast<unsigned char>(s[k])))
                ++k;
        }
        if (k == start) throw std::runtime_error("oracle: empty label");
        t.label = std::string(s.substr(start, k - start));
        skip();
        if (k < s.size() && s[k] == '(') {
            ++k;
            skip();
            if (s[k] == ')') {
                ++k;
                return t;
            }
            while (true) {
                t.kids.push_back(tree());
                skip();
                if (s[k] == ',') {
                    ++k;
                    continue;
                }
                if (s[k] == ')') {
                    ++k;
                    break;
                }
                throw std::runtime_error("oracle: bad tree text");
            }
        }
        return t;
    }
};
}  // namespace detail

inline NTree parse(std::string_view text) {
    detail::Reader r{text};
    return r.tree();
}

inline NTree from(const mttlab::Tree& t) { return parse(mttlab::to_string(t)); }

inline std::size_t size(const NTree& t) {
    std::size_t n = 1;
    for (auto& c : t.kids) n += size(c);
    return n;
}

inline std::size_t height(const NTree& t) {
    std::size_t h = 0;
    for (auto& c : t.kids) h = std::max(h, height(c));
    return h + 1;
}

inline void collect(const NTree& t, std::set<std::string>& out) {
    out.insert(show(t));
    for (auto& c : t.kids) collect(c, out);
}

inline std::size_t distinct_subtrees(const NTree& t) {
    std::set<std::string> s;
    collect(t, s);
    return s.size();
}

inline bool is_param(const std::string& l, int* j = nullptr) {
    if (l.size() < 2 || l[0] != 'y') return false;
    for (std::size_t k = 1; k < l.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(l[k]))) return false;
    if (j) *j = std::stoi(l.substr(1));
    return true;
}

// First-order: y_j -> args[j-1].
inline NTree fill(const NTree& t, const std::vector<NTree>& args) {
    int j;
    if (is_param(t.label, &j) && t.kids.empty() && j >= 1 && j <= static_cast<int>(args.size())) return args[j - 1];
    NTree out{t.label, {}};
    for (auto& c : t.kids) out.kids.push_back(fill(c, args));
    return out;
}

// Second-order substitution, innermost children first.
inline NTree subst2(const NTree& t, const std::map<std::string, NTree>& images) {
    std::vector<NTree> kids;
    for (auto& c : t.kids) kids.push_back(subst2(c, images));
    auto it = images.find(t.label);
    if (it == images.end()) return NTree{t.label, kids};
    return fill(it->second, kids);
}

// Bottom-up run of the look-ahead automaton.
inline int la_run(const mttlab::Mtt& m, const NTree& s, const std::map<std::string, int>& marks = {}) {
    auto mk = marks.find(s.label);
    if (mk != marks.end()) return mk->second;
    auto idx = m.input().find(mttlab::Symbol::intern(s.label));
    if (!idx) throw std::runtime_error("oracle: unknown input symbol " + s.label);
    std::vector<int> args;
    for (auto& c : s.kids) args.push_back(la_run(m, c, marks));
    return m.lookahead().next(*idx, args);
}

// Innermost evaluation: arguments of a call are normalized before the
// call is unfolded.  Marked leaves (in `marks`) produce <q,@m>(args).
class Interpreter {
public:
    explicit Interpreter(const mttlab::Mtt& m, std::map<std::string, int> marks = {})
        : m_(m), marks_(std::move(marks)) {}

    NTree call(const std::string& q, const NTree& s, const std::vector<NTree>& args) {
        if (marks_.count(s.label)) return NTree{"<" + q + "," + s.label + ">", args};
        int qi = *m_.find_state(q);
        auto idx = m_.input().find(mttlab::Symbol::intern(s.label));
        std::vector<int> la;
        for (auto& c : s.kids) la.push_back(la_run(m_, c, marks_));
        const mttlab::Tree& rhs = m_.rule(qi, *idx, la);
        auto it = rules_.find(rhs.node());
        if (it == rules_.end()) it = rules_.emplace(rhs.node(), from(rhs)).first;
        if (++steps_ > step_cap) throw std::runtime_error("oracle: step cap");
        return inst(it->second, s, args);
    }

    NTree apply(const NTree& s) { return call(m_.state_name(m_.initial()), s, {}); }

    static constexpr std::size_t step_cap = 50'000'000;

private:
    NTree inst(const NTree& t, const NTree& s, const std::vector<NTree>& args) {
        int j;
        if (is_param(t.label, &j) && t.kids.empty()) return args[j - 1];
        std::vector<NTree> kids;
        for (auto& c : t.kids) kids.push_back(inst(c, s, args));
        if (t.label.front() == '<') {
            auto comma = t.label.find(',');
            std::string q = t.label.substr(1, comma - 1);
            int i = std::stoi(t.label.substr(comma + 2, t.label.size() - comma - 3));
            return call(q, s.kids[static_cast<std::size_t>(i - 1)], kids);
        }
        return NTree{t.label, kids};
    }

    const mttlab::Mtt& m_;
    std::map<std::string, int> marks_;
    std::map<const void*, NTree> rules_;
    std::size_t steps_ = 0;
};

inline NTree apply(const mttlab::Mtt& m, const NTree& s) { return Interpreter(m).apply(s); }

// All trees over (label, rank) pairs with at most max_size nodes.
inline std::vector<NTree> all_trees(const std::vector<std::pair<std::string, int>>& alphabet, std::size_t max_size) {
    // by_size[n] = trees with exactly n nodes
    std::vector<std::vector<NTree>> by_size(max_size + 1);
    for (std::size_t n = 1; n <= max_size; ++n)
        for (auto& [label, rank] : alphabet) {
            if (rank == 0) {
                if (n == 1) by_size[1].push_back({label, {}});
                continue;
            }
            // distribute n-1 nodes over rank children
            std::vector<std::size_t> parts(static_cast<std::size_t>(rank), 1);
            std::function<void(std::size_t, std::size_t, std::vector<NTree>&)> go =
                [&](std::size_t child, std::size_t left, std::vector<NTree>& acc) {
                    if (child == parts.size()) {
                        if (left == 0) by_size[n].push_back({label, acc});
                        return;
                    }
                    for (std::size_t k = 1; k <= left; ++k)
                        for (auto& t : by_size[k]) {
                            acc.push_back(t);
                            go(child + 1, left - k, acc);
                            acc.pop_back();
                        }
                };
            std::vector<NTree> acc;
            if (n >= 1) go(0, n - 1, acc);
        }
    std::vector<NTree> out;
    for (auto& v : by_size) out.insert(out.end(), v.begin(), v.end());
    return out;
}

inline std::vector<std::pair<std::string, int>> alphabet_of(const mttlab::RankedAlphabet& a) {
    std::vector<std::pair<std::string, int>> out;
    for (auto& s : a) out.push_back({s.symbol.text(), s.rank});
    return out;
}

// Pairs (q, p) with <q,@p> in the provisional output of some input of at
// most max_size nodes containing marked leaves.
inline std::set<std::pair<int, int>> reachable_pairs(const mttlab::Mtt& m, std::size_t max_size) {
    auto alpha = alphabet_of(m.input());
    std::map<std::string, int> marks;
    for (std::size_t p = 0; p < m.la_count(); ++p) {
        std::string name = "@" + m.lookahead().state_name(static_cast<int>(p));
        alpha.push_back({name, 0});
        marks.emplace(name, static_cast<int>(p));
    }
    std::set<std::pair<int, int>> out;
    std::function<void(const NTree&)> scan = [&](const NTree& t) {
        if (t.label.front() == '<') {
            auto comma = t.label.find(',');
            std::string q = t.label.substr(1, comma - 1);
            std::string mark = t.label.substr(comma + 1, t.label.size() - comma - 2);
            if (marks.count(mark)) out.insert({*m.find_state(q), marks.at(mark)});
        }
        for (auto& c : t.kids) scan(c);
    };
    auto nonempty = m.lookahead().nonempty_states();
    for (const NTree& s : all_trees(alpha, max_size)) {
        // marks must stand for nonempty languages
        std::function<bool(const NTree&)> ok = [&](const NTree& t) {
            auto it = marks.find(t.label);
            if (it != marks.end() && !nonempty[it->second]) return false;
            for (auto& c : t.kids)
                if (!ok(c)) return false;
            return true;
        };
        if (!ok(s)) continue;
        Interpreter in(m, marks);
        scan(in.apply(s));
    }
    return out;
}

}  // namespace oracle
