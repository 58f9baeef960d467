#include "mttlab/format.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <sstream>

namespace mttlab {

namespace {

struct Line {
    int number;
    std::string text;
    // Column (1-based) of text[0] in the source line.
    int offset;
};

std::string trim(const std::string& s, int& lead) {
    std::size_t b = 0;
    while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    std::size_t e = s.size();
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    lead = static_cast<int>(b);
    return s.substr(b, e - b);
}

class Cursor {
public:
    explicit Cursor(const Line& line) : line_(line) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxError(line_.number, line_.offset + static_cast<int>(pos_) + 1, what);
    }

    void ws() {
        while (pos_ < text().size() && std::isspace(static_cast<unsigned char>(text()[pos_])))
            ++pos_;
    }
    bool at_end() {
        ws();
        return pos_ >= text().size();
    }
    char peek() const { return pos_ < text().size() ? text()[pos_] : '\0'; }
    bool eat(char c) {
        ws();
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool eat_arrow() {
        ws();
        if (text().compare(pos_, 2, "->") == 0) {
            pos_ += 2;
            return true;
        }
        return false;
    }
    std::string ident() {
        ws();
        std::size_t start = pos_;
        while (pos_ < text().size() &&
               (std::isalnum(static_cast<unsigned char>(text()[pos_])) || text()[pos_] == '_' ||
                text()[pos_] == '\'' || text()[pos_] == '.' || text()[pos_] == '~'))
            ++pos_;
        if (start == pos_) fail("expected a name");
        return text().substr(start, pos_ - start);
    }
    std::size_t pos() const { return pos_; }
    std::string rest() const { return text().substr(pos_); }
    const Line& line() const { return line_; }

private:
    const std::string& text() const { return line_.text; }
    const Line& line_;
    std::size_t pos_ = 0;
};

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

void parse_decls(const Line& line, const std::string& body, RankedAlphabet& alphabet) {
    for (const std::string& w : words(body)) {
        std::size_t slash = w.rfind('/');
        if (slash == std::string::npos || slash == 0 || slash + 1 == w.size())
            throw SyntaxError(line.number, line.offset + 1, "expected name/rank, got '" + w + "'");
        std::string name = w.substr(0, slash);
        std::string rank = w.substr(slash + 1);
        for (char c : rank)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw SyntaxError(line.number, line.offset + 1, "bad rank in '" + w + "'");
        try {
            alphabet.add(Symbol::intern(name), std::stoi(rank));
        } catch (const Error& e) {
            throw SyntaxError(line.number, line.offset + 1, e.what());
        }
    }
}

Tree parse_rhs(const Cursor& cur) {
    std::string text = cur.rest();
    try {
        return parse_tree(text);
    } catch (const SyntaxError& e) {
        throw SyntaxError(cur.line().number,
                          cur.line().offset + static_cast<int>(cur.pos()) + e.column(),
                          std::string(e.what()).substr(std::string(e.what()).find(": ") + 2));
    }
}

}  // namespace

Mtt parse_mtt(std::string_view text) {
    std::optional<std::string> name;
    RankedAlphabet input, output;
    std::optional<std::vector<std::string>> la_states;
    std::vector<std::pair<std::string, int>> state_decls;
    std::optional<Line> initial;
    bool have_input = false, have_output = false, have_states = false;
    std::vector<Line> transitions, rules;

    std::istringstream in{std::string(text)};
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::size_t comment = raw.find("//");
        if (comment != std::string::npos) raw.erase(comment);
        int lead = 0;
        std::string body = trim(raw, lead);
        if (body.empty()) continue;
        Line line{number, body, lead};
        std::string head = body.substr(0, body.find_first_of(" \t"));
        std::string tail = head.size() < body.size() ? body.substr(head.size()) : "";
        if (head == "name") {
            auto w = words(tail);
            if (w.size() != 1) throw SyntaxError(number, lead + 1, "expected one name");
            name = w[0];
        } else if (head == "input") {
            parse_decls(line, tail, input);
            have_input = true;
        } else if (head == "output") {
            parse_decls(line, tail, output);
            have_output = true;
        } else if (head == "lookahead") {
            la_states = words(tail);
            if (la_states->empty()) throw SyntaxError(number, lead + 1, "no look-ahead states");
        } else if (head == "states") {
            RankedAlphabet tmp;
            parse_decls(line, tail, tmp);
            for (auto& s : tmp) state_decls.emplace_back(s.symbol.text(), s.rank);
            have_states = true;
        } else if (head == "initial") {
            initial = Line{number, tail, lead + static_cast<int>(head.size())};
        } else if (body.find("->") != std::string::npos) {
            Cursor cur(line);
            cur.ident();
            if (cur.eat(','))
                rules.push_back(line);
            else
                transitions.push_back(line);
        } else {
            throw SyntaxError(number, lead + 1, "unrecognized line");
        }
    }
    if (!have_input) throw SyntaxError(number + 1, 1, "missing 'input' line");
    if (!have_output) throw SyntaxError(number + 1, 1, "missing 'output' line");
    if (!have_states) throw SyntaxError(number + 1, 1, "missing 'states' line");
    if (!initial) throw SyntaxError(number + 1, 1, "missing 'initial' line");

    TreeAutomaton la;
    if (!la_states) {
        if (!transitions.empty())
            throw SyntaxError(transitions[0].number, 1, "transition without 'lookahead' line");
        la = TreeAutomaton::trivial(input);
    } else {
        try {
            la = TreeAutomaton(input, *la_states);
        } catch (const Error& e) {
            throw SyntaxError(1, 1, e.what());
        }
        for (const Line& line : transitions) {
            Cursor cur(line);
            std::string sym = cur.ident();
            std::vector<std::string> args;
            if (cur.eat('(')) {
                if (!cur.eat(')')) {
                    do args.push_back(cur.ident());
                    while (cur.eat(','));
                    cur.expect(')');
                }
            }
            if (!cur.eat_arrow()) cur.fail("expected '->'");
            std::string target = cur.ident();
            if (!cur.at_end()) cur.fail("trailing input");
            try {
                auto idx = input.find(Symbol::intern(sym));
                if (!idx) cur.fail("unknown input symbol '" + sym + "'");
                std::vector<int> ids;
                for (auto& a : args) ids.push_back(la.state(a));
                if (static_cast<int>(ids.size()) != input[*idx].rank)
                    cur.fail("wrong number of arguments for '" + sym + "'");
                if (la.defined(*idx, ids)) cur.fail("duplicate transition");
                la.set(Symbol::intern(sym), ids, la.state(target));
            } catch (const SyntaxError&) {
                throw;
            } catch (const Error& e) {
                throw SyntaxError(line.number, line.offset + 1, e.what());
            }
        }
        auto missing = la.missing();
        if (!missing.empty())
            throw SyntaxError(transitions.empty() ? number : transitions.back().number, 1,
                              "look-ahead transition undefined for " + missing[0]);
    }

    Mtt m(name.value_or("M"), input, output, la);
    for (auto& [state, rank] : state_decls) {
        try {
            m.add_state(state, rank);
        } catch (const Error& e) {
            throw SyntaxError(1, 1, e.what());
        }
    }
    {
        Cursor cur(*initial);
        std::string q = cur.ident();
        if (!cur.at_end()) cur.fail("trailing input");
        auto idx = m.find_state(q);
        if (!idx) cur.fail("unknown initial state '" + q + "'");
        m.set_initial(*idx);
    }
    for (const Line& line : rules) {
        Cursor cur(line);
        std::string qname = cur.ident();
        auto q = m.find_state(qname);
        if (!q) cur.fail("unknown state '" + qname + "'");
        cur.expect(',');
        std::string sym = cur.ident();
        auto idx = input.find(Symbol::intern(sym));
        if (!idx) cur.fail("unknown input symbol '" + sym + "'");
        int k = input[*idx].rank;
        std::vector<int> las;
        bool attached = cur.peek() == '(';
        cur.ws();
        bool vars_done = false;
        if (cur.peek() == '(') {
            // Decide whether this group lists variables or parameters.
            std::string rest = cur.rest();
            std::size_t i = 1;
            while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
            bool is_vars = i < rest.size() && (rest[i] == 'x' || (rest[i] == ')' && attached));
            if (is_vars) {
                cur.expect('(');
                int expected = 1;
                if (!cur.eat(')')) {
                    do {
                        std::string v = cur.ident();
                        if (v != "x" + std::to_string(expected))
                            cur.fail("expected x" + std::to_string(expected));
                        ++expected;
                        if (cur.eat(':')) {
                            std::string p = cur.ident();
                            auto pid = la.find_state(p);
                            if (!pid) cur.fail("unknown look-ahead state '" + p + "'");
                            las.push_back(*pid);
                        } else {
                            if (la.state_count() != 1)
                                cur.fail("look-ahead state required for " + v);
                            las.push_back(0);
                        }
                    } while (cur.eat(','));
                    cur.expect(')');
                }
                vars_done = true;
            }
        }
        if (static_cast<int>(las.size()) != k)
            cur.fail("symbol '" + sym + "' has rank " + std::to_string(k));
        (void)vars_done;
        if (cur.eat('(')) {
            int expected = 1;
            if (!cur.eat(')')) {
                do {
                    std::string y = cur.ident();
                    if (y != "y" + std::to_string(expected))
                        cur.fail("expected y" + std::to_string(expected));
                    ++expected;
                } while (cur.eat(','));
                cur.expect(')');
            }
            if (expected - 1 != m.rank(*q))
                cur.fail("state '" + qname + "' has rank " + std::to_string(m.rank(*q)));
        }
        if (!cur.eat_arrow()) cur.fail("expected '->'");
        cur.ws();
        if (cur.at_end()) cur.fail("missing right-hand side");
        Tree rhs = parse_rhs(cur);
        m.set_rule(*q, *idx, las, rhs);
    }
    return m;
}

Mtt load_mtt(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::syntax_error, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_mtt(buf.str());
}

static std::string decls(const RankedAlphabet& a) {
    std::string out;
    for (auto& s : a) out += " " + s.symbol.text() + "/" + std::to_string(s.rank);
    return out;
}

std::string print_mtt(const Mtt& m) {
    std::string out = "name " + m.name() + "\n";
    out += "input" + decls(m.input()) + "\n";
    out += "output" + decls(m.output()) + "\n";
    const TreeAutomaton& la = m.lookahead();
    bool implicit_la = la.state_count() == 1 && la.state_name(0) == "p";
    if (!implicit_la) {
        out += "lookahead";
        for (auto& p : la.state_names()) out += " " + p;
        out += "\n";
        for (std::size_t s = 0; s < m.input().size(); ++s)
            for (auto& args : la.tuples(m.input()[s].rank)) {
                out += m.input()[s].symbol.text();
                if (!args.empty()) {
                    out += "(";
                    for (std::size_t i = 0; i < args.size(); ++i) {
                        if (i) out += ", ";
                        out += la.state_name(args[i]);
                    }
                    out += ")";
                }
                out += " -> " + la.state_name(la.next(s, args)) + "\n";
            }
    }
    out += "states";
    for (std::size_t q = 0; q < m.state_count(); ++q)
        out += " " + m.state_name(static_cast<int>(q)) + "/" +
               std::to_string(m.rank(static_cast<int>(q)));
    out += "\n";
    if (m.initial() >= 0) out += "initial " + m.state_name(m.initial()) + "\n";
    out += "\n";
    bool single = la.state_count() == 1;
    m.for_each_rule([&](int q, std::size_t s, const std::vector<int>& args, const Tree& rhs) {
        out += m.state_name(q) + ", " + m.input()[s].symbol.text();
        if (!args.empty()) {
            out += "(";
            for (std::size_t i = 0; i < args.size(); ++i) {
                if (i) out += ", ";
                out += "x" + std::to_string(i + 1);
                if (!single) out += ":" + la.state_name(args[i]);
            }
            out += ")";
        }
        if (m.rank(q) > 0) {
            out += " (";
            for (int j = 1; j <= m.rank(q); ++j) {
                if (j > 1) out += ", ";
                out += "y" + std::to_string(j);
            }
            out += ")";
        }
        out += " -> " + to_string(rhs) + "\n";
    });
    return out;
}

void save_mtt(const Mtt& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::syntax_error, "cannot write " + path);
    out << print_mtt(m);
}

}  // namespace mttlab
