#include "mttlab/mtt.hpp"

#include <algorithm>
#include <deque>

namespace mttlab {

const char* to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::totality: return "TotalityViolation";
    case ViolationKind::determinism: return "DeterminismViolation";
    case ViolationKind::rank: return "RankViolation";
    case ViolationKind::param_range: return "ParamRangeViolation";
    case ViolationKind::var_range: return "VarRangeViolation";
    case ViolationKind::unknown_state: return "UnknownStateViolation";
    case ViolationKind::unknown_symbol: return "UnknownSymbolViolation";
    case ViolationKind::nondeletion: return "NondeletionViolation";
    case ViolationKind::initial: return "InitialStateViolation";
    case ViolationKind::reserved_name: return "ReservedNameViolation";
    }
    return "Violation";
}

bool ValidationReport::ok_except_nondeletion() const {
    return std::all_of(violations.begin(), violations.end(),
                       [](const Violation& v) { return v.kind == ViolationKind::nondeletion; });
}

bool ValidationReport::has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.kind == kind; });
}

Mtt::Mtt(std::string name, RankedAlphabet input, RankedAlphabet output, TreeAutomaton lookahead)
    : name_(std::move(name)),
      input_(std::move(input)),
      output_(std::move(output)),
      la_(std::move(lookahead)) {
    if (!(la_.alphabet() == input_))
        throw Error(ErrorCode::invalid_transducer,
                    "look-ahead automaton is not over the input alphabet");
}

int Mtt::add_state(const std::string& name, int rank) {
    if (state_index_.count(name))
        throw Error(ErrorCode::invalid_transducer, "duplicate state " + name);
    if (rank < 0) throw Error(ErrorCode::invalid_transducer, "negative rank for state " + name);
    int q = static_cast<int>(states_.size());
    states_.push_back({name, rank});
    state_index_.emplace(name, q);
    std::vector<std::vector<std::optional<Tree>>> per_symbol(input_.size());
    for (std::size_t s = 0; s < input_.size(); ++s) {
        std::size_t n = 1;
        for (int k = 0; k < input_[s].rank; ++k) n *= la_.state_count();
        per_symbol[s].resize(n);
    }
    rules_.push_back(std::move(per_symbol));
    return q;
}

std::optional<int> Mtt::find_state(std::string_view name) const {
    auto it = state_index_.find(std::string(name));
    if (it == state_index_.end()) return std::nullopt;
    return it->second;
}

int Mtt::call_target(Symbol call) const {
    if (call.kind() != SymbolKind::call && call.kind() != SymbolKind::mark_call) return -1;
    auto it = state_index_.find(call.state());
    return it == state_index_.end() ? -1 : it->second;
}

std::string Mtt::key_string(int q, std::size_t symbol, const std::vector<int>& la) const {
    std::string out = states_[q].name + ", " + input_[symbol].symbol.text();
    if (!la.empty()) {
        out += "(";
        for (std::size_t i = 0; i < la.size(); ++i) {
            if (i) out += ", ";
            out += "x" + std::to_string(i + 1) + ":" + la_.state_name(la[i]);
        }
        out += ")";
    }
    return out;
}

bool Mtt::set_rule(int q, std::size_t symbol, const std::vector<int>& la, const Tree& rhs) {
    auto& slot = rules_.at(q).at(symbol).at(la_.tuple_index(la));
    if (slot) {
        duplicates_.push_back(key_string(q, symbol, la));
        return false;
    }
    slot = rhs;
    return true;
}

void Mtt::put_rule(int q, std::size_t symbol, const std::vector<int>& la, const Tree& rhs) {
    rules_.at(q).at(symbol).at(la_.tuple_index(la)) = rhs;
}

const Tree* Mtt::find_rule(int q, std::size_t symbol, const std::vector<int>& la) const {
    const auto& slot = rules_[q][symbol][la_.tuple_index(la)];
    return slot ? &*slot : nullptr;
}

const Tree& Mtt::rule(int q, std::size_t symbol, const std::vector<int>& la) const {
    const Tree* r = find_rule(q, symbol, la);
    if (!r)
        throw Error(ErrorCode::invalid_transducer, "no rule for " + key_string(q, symbol, la));
    return *r;
}

int Mtt::max_rhs_height() const {
    int h = 1;
    for_each_rule([&](int, std::size_t, const std::vector<int>&, const Tree& rhs) {
        h = std::max(h, static_cast<int>(rhs.height()));
    });
    return h;
}

int Mtt::max_state_rank() const {
    int r = 0;
    for (auto& s : states_) r = std::max(r, s.rank);
    return r;
}

namespace {

void check_name(const std::string& what, const std::string& name, ValidationReport& report) {
    if (!is_identifier(name) || is_reserved_name(name))
        report.violations.push_back({ViolationKind::reserved_name, name,
                                     what + " name '" + name + "' is reserved or malformed"});
}

void check_rhs(const Mtt& m, int q, std::size_t symbol, const std::vector<int>& la,
               const Tree& rhs, ValidationReport& report) {
    std::string key = m.key_string(q, symbol, la);
    int k = m.input()[symbol].rank;
    int rank = m.rank(q);
    std::vector<bool> seen(static_cast<std::size_t>(rank) + 1, false);
    for (const Tree& t : subtrees(rhs)) {
        Symbol l = t.label();
        int arity = static_cast<int>(t.arity());
        switch (l.kind()) {
        case SymbolKind::param:
            if (arity != 0)
                report.violations.push_back(
                    {ViolationKind::rank, key, "parameter " + l.text() + " has children"});
            if (l.index() > rank)
                report.violations.push_back({ViolationKind::param_range, key,
                                             l.text() + " exceeds the rank of " + m.state_name(q)});
            else
                seen[l.index()] = true;
            break;
        case SymbolKind::var:
            report.violations.push_back(
                {ViolationKind::unknown_symbol, key, "bare input variable " + l.text()});
            break;
        case SymbolKind::call: {
            int target = m.call_target(l);
            if (target < 0) {
                report.violations.push_back(
                    {ViolationKind::unknown_state, key, "unknown state in " + l.text()});
                break;
            }
            if (l.index() > k)
                report.violations.push_back(
                    {ViolationKind::var_range, key, l.text() + " exceeds the rank of the symbol"});
            if (arity != m.rank(target))
                report.violations.push_back({ViolationKind::rank, key,
                                             l.text() + " applied to " + std::to_string(arity) +
                                                 " arguments, rank is " +
                                                 std::to_string(m.rank(target))});
            break;
        }
        default: {
            auto idx = m.output().find(l);
            if (!idx) {
                report.violations.push_back(
                    {ViolationKind::unknown_symbol, key, "unknown output symbol " + l.text()});
            } else if (m.output()[*idx].rank != arity) {
                report.violations.push_back({ViolationKind::rank, key,
                                             l.text() + " has " + std::to_string(arity) +
                                                 " children, rank is " +
                                                 std::to_string(m.output()[*idx].rank)});
            }
        }
        }
    }
    for (int j = 1; j <= rank; ++j)
        if (!seen[j])
            report.violations.push_back(
                {ViolationKind::nondeletion, key, "y" + std::to_string(j) + " does not occur"});
}

}  // namespace

ValidationReport validate(const Mtt& m) {
    ValidationReport report;
    for (auto& s : m.input())
        if (s.symbol.kind() != SymbolKind::mark) check_name("input symbol", s.symbol.text(), report);
    for (auto& s : m.output())
        if (s.symbol.kind() == SymbolKind::plain) check_name("output symbol", s.symbol.text(), report);
    for (std::size_t q = 0; q < m.state_count(); ++q) check_name("state", m.state_name(q), report);
    for (auto& p : m.lookahead().state_names()) check_name("look-ahead state", p, report);
    if (m.initial() < 0)
        report.violations.push_back({ViolationKind::initial, "", "no initial state"});
    else if (m.rank(m.initial()) != 0)
        report.violations.push_back(
            {ViolationKind::initial, m.state_name(m.initial()), "initial state must have rank 0"});
    for (auto& key : m.duplicate_keys())
        report.violations.push_back({ViolationKind::determinism, key, "more than one rule"});
    for (std::size_t q = 0; q < m.state_count(); ++q)
        for (std::size_t s = 0; s < m.input().size(); ++s)
            for (auto& la : m.lookahead().tuples(m.input()[s].rank)) {
                const Tree* rhs = m.find_rule(static_cast<int>(q), s, la);
                if (!rhs) {
                    report.violations.push_back({ViolationKind::totality,
                                                 m.key_string(static_cast<int>(q), s, la),
                                                 "no rule"});
                    continue;
                }
                check_rhs(m, static_cast<int>(q), s, la, *rhs, report);
            }
    return report;
}

void require_valid(const Mtt& m) {
    auto report = validate(m);
    if (report.ok()) return;
    const Violation& v = report.violations.front();
    std::string msg = std::string(to_string(v.kind)) + " at " + v.key + ": " + v.message;
    if (report.ok_except_nondeletion()) throw Error(ErrorCode::not_nondeleting, msg);
    throw Error(ErrorCode::invalid_transducer, msg);
}

std::vector<Symbol> calls_in(const Tree& rhs) {
    std::vector<Symbol> out;
    std::vector<Tree> stack{rhs};
    while (!stack.empty()) {
        Tree t = stack.back();
        stack.pop_back();
        if (t.label().kind() == SymbolKind::call &&
            std::find(out.begin(), out.end(), t.label()) == out.end())
            out.push_back(t.label());
        for (std::size_t i = t.arity(); i-- > 0;) stack.push_back(t.child(i));
    }
    return out;
}

Evaluator::Evaluator(const Mtt& m, std::map<Symbol, int> marks) : m_(m), marks_(std::move(marks)) {}

int Evaluator::la(const Tree& s) {
    auto hit = la_memo_.find(s.node());
    if (hit != la_memo_.end()) return hit->second;
    int p;
    auto idx = m_.input().find(s.label());
    if (s.label().kind() == SymbolKind::mark && !idx) {
        auto mk = marks_.find(s.label());
        if (mk != marks_.end()) {
            p = mk->second;
        } else {
            auto named = m_.lookahead().find_state(s.label().mark_name());
            if (!named) throw Error(ErrorCode::unknown_symbol, "unknown mark " + s.label().text());
            p = *named;
        }
    } else {
        if (!idx || m_.input()[*idx].rank != static_cast<int>(s.arity()))
            throw Error(ErrorCode::unknown_symbol,
                        "symbol " + s.label().text() + "/" + std::to_string(s.arity()) +
                            " is not in the input alphabet");
        std::vector<int> args;
        for (const Tree& c : s.children()) args.push_back(la(c));
        p = m_.lookahead().next(*idx, args);
    }
    la_memo_.emplace(s.node(), p);
    return p;
}

Tree Evaluator::eval(int q, const Tree& s) {
    auto key = std::make_pair(q, s.node());
    auto hit = memo_.find(key);
    if (hit != memo_.end()) return hit->second;
    Tree out;
    auto idx = m_.input().find(s.label());
    if (s.label().kind() == SymbolKind::mark && !idx) {
        la(s);
        std::vector<Tree> params;
        for (int j = 1; j <= m_.rank(q); ++j) params.push_back(Tree::make(Symbol::param(j)));
        out = Tree::make(Symbol::mark_call(m_.state_name(q), s.label().mark_name()),
                         std::move(params));
    } else {
        if (!idx || m_.input()[*idx].rank != static_cast<int>(s.arity()))
            throw Error(ErrorCode::unknown_symbol,
                        "symbol " + s.label().text() + "/" + std::to_string(s.arity()) +
                            " is not in the input alphabet");
        std::vector<int> args;
        for (const Tree& c : s.children()) args.push_back(la(c));
        const Tree& rhs = m_.rule(q, *idx, args);
        auto cit = calls_.find(rhs.node());
        if (cit == calls_.end()) cit = calls_.emplace(rhs.node(), calls_in(rhs)).first;
        std::map<Symbol, Tree> bindings;
        for (Symbol c : cit->second) {
            int target = m_.call_target(c);
            if (target < 0) throw Error(ErrorCode::invalid_transducer, "unknown state in " + c.text());
            bindings.emplace(c, eval(target, s.child(static_cast<std::size_t>(c.index() - 1))));
        }
        out = bindings.empty() ? rhs : second_order_subst(rhs, bindings);
    }
    memo_.emplace(key, out);
    return out;
}

Tree eval_state(const Mtt& m, int q, const Tree& s) { return Evaluator(m).eval(q, s); }
Tree apply(const Mtt& m, const Tree& s) { return Evaluator(m).apply(s); }

Tree provisional_output(const Mtt& m, const Tree& s, const std::map<Symbol, int>& marks) {
    return Evaluator(m, marks).apply(s);
}

Symbol la_mark(const Mtt& m, int p) { return Symbol::mark(m.lookahead().state_name(p)); }

Mtt extend(const Mtt& m) {
    RankedAlphabet input = m.input();
    for (std::size_t p = 0; p < m.la_count(); ++p) input.add(la_mark(m, static_cast<int>(p)), 0);
    RankedAlphabet output = m.output();
    for (std::size_t q = 0; q < m.state_count(); ++q)
        for (std::size_t p = 0; p < m.la_count(); ++p)
            output.add(Symbol::mark_call(m.state_name(static_cast<int>(q)),
                                         m.lookahead().state_name(static_cast<int>(p))),
                       m.rank(static_cast<int>(q)));
    TreeAutomaton la(input, m.lookahead().state_names());
    for (std::size_t s = 0; s < m.input().size(); ++s)
        for (auto& args : m.lookahead().tuples(m.input()[s].rank))
            la.set(m.input()[s].symbol, args, m.lookahead().next(s, args));
    for (std::size_t p = 0; p < m.la_count(); ++p)
        la.set(la_mark(m, static_cast<int>(p)), {}, static_cast<int>(p));
    la.finish();
    Mtt out(m.name(), input, output, la);
    for (std::size_t q = 0; q < m.state_count(); ++q)
        out.add_state(m.state_name(static_cast<int>(q)), m.rank(static_cast<int>(q)));
    out.set_initial(m.initial());
    m.for_each_rule([&](int q, std::size_t s, const std::vector<int>& args, const Tree& rhs) {
        out.set_rule(q, s, args, rhs);
    });
    for (std::size_t q = 0; q < m.state_count(); ++q)
        for (std::size_t p = 0; p < m.la_count(); ++p) {
            std::vector<Tree> params;
            for (int j = 1; j <= m.rank(static_cast<int>(q)); ++j)
                params.push_back(Tree::make(Symbol::param(j)));
            Tree rhs = Tree::make(Symbol::mark_call(m.state_name(static_cast<int>(q)),
                                                    m.lookahead().state_name(static_cast<int>(p))),
                                  std::move(params));
            out.set_rule(static_cast<int>(q), *input.find(la_mark(m, static_cast<int>(p))), {},
                         rhs);
        }
    return out;
}

std::set<std::pair<int, int>> reachable_calls(const Mtt& m) {
    std::set<std::pair<int, int>> reached;
    if (m.initial() < 0) return reached;
    auto nonempty = m.lookahead().nonempty_states();
    std::deque<std::pair<int, int>> work;
    for (std::size_t p = 0; p < m.la_count(); ++p)
        if (nonempty[p]) {
            reached.insert({m.initial(), static_cast<int>(p)});
            work.push_back({m.initial(), static_cast<int>(p)});
        }
    while (!work.empty()) {
        auto [q, p] = work.front();
        work.pop_front();
        for (std::size_t s = 0; s < m.input().size(); ++s)
            for (auto& args : m.lookahead().tuples(m.input()[s].rank)) {
                if (m.lookahead().next(s, args) != p) continue;
                if (!std::all_of(args.begin(), args.end(), [&](int a) { return nonempty[a]; }))
                    continue;
                const Tree* rhs = m.find_rule(q, s, args);
                if (!rhs) continue;
                for (Symbol c : calls_in(*rhs)) {
                    int target = m.call_target(c);
                    if (target < 0) continue;
                    std::pair<int, int> next{target, args[c.index() - 1]};
                    if (reached.insert(next).second) work.push_back(next);
                }
            }
    }
    return reached;
}

namespace {

Tree rename_calls(const Tree& t, const std::map<std::string, std::string>& states) {
    std::vector<Tree> kids;
    for (const Tree& c : t.children()) kids.push_back(rename_calls(c, states));
    Symbol l = t.label();
    if (l.kind() == SymbolKind::call) {
        auto it = states.find(l.state());
        if (it != states.end()) l = Symbol::call(it->second, l.index());
    }
    return Tree::make(l, std::move(kids));
}

}  // namespace

Mtt rename_states(const Mtt& m, const std::map<std::string, std::string>& states) {
    Mtt out(m.name(), m.input(), m.output(), m.lookahead());
    for (std::size_t q = 0; q < m.state_count(); ++q) {
        const std::string& name = m.state_name(static_cast<int>(q));
        auto it = states.find(name);
        out.add_state(it == states.end() ? name : it->second, m.rank(static_cast<int>(q)));
    }
    out.set_initial(m.initial());
    m.for_each_rule([&](int q, std::size_t s, const std::vector<int>& la, const Tree& rhs) {
        out.set_rule(q, s, la, rename_calls(rhs, states));
    });
    return out;
}

Mtt restrict_to_reachable_states(const Mtt& m) {
    std::vector<bool> keep(m.state_count(), false);
    std::deque<int> work;
    if (m.initial() >= 0) {
        keep[m.initial()] = true;
        work.push_back(m.initial());
    }
    while (!work.empty()) {
        int q = work.front();
        work.pop_front();
        for (std::size_t s = 0; s < m.input().size(); ++s)
            for (auto& la : m.lookahead().tuples(m.input()[s].rank)) {
                const Tree* rhs = m.find_rule(q, s, la);
                if (!rhs) continue;
                for (Symbol c : calls_in(*rhs)) {
                    int t = m.call_target(c);
                    if (t >= 0 && !keep[t]) {
                        keep[t] = true;
                        work.push_back(t);
                    }
                }
            }
    }
    Mtt out(m.name(), m.input(), m.output(), m.lookahead());
    std::vector<int> remap(m.state_count(), -1);
    for (std::size_t q = 0; q < m.state_count(); ++q)
        if (keep[q])
            remap[q] = out.add_state(m.state_name(static_cast<int>(q)), m.rank(static_cast<int>(q)));
    if (m.initial() >= 0) out.set_initial(remap[m.initial()]);
    m.for_each_rule([&](int q, std::size_t s, const std::vector<int>& la, const Tree& rhs) {
        if (keep[q]) out.set_rule(remap[q], s, la, rhs);
    });
    return out;
}

}  // namespace mttlab
