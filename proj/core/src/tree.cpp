#include "mttlab/tree.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <memory>
#include <mutex>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace mttlab {

namespace {

constexpr std::uint32_t kIndexMask = (1u << 28) - 1;

struct SymbolInfo {
    std::string text;
    int index = 0;
    std::string state;
    std::string mark;
    std::vector<int> indices;
};

struct SymbolTable {
    std::shared_mutex mutex;
    std::deque<SymbolInfo> infos;
    std::unordered_map<std::string, std::uint32_t> ids;

    SymbolTable() { infos.emplace_back(); }
};

SymbolTable& symbol_table() {
    static SymbolTable table;
    return table;
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.' ||
           c == '~';
}

// Parses "<letter><digits>" with a positive value and no leading zero.
std::optional<int> indexed(std::string_view text, char letter) {
    if (text.size() < 2 || text[0] != letter || text[1] == '0') return std::nullopt;
    int value = 0;
    for (std::size_t i = 1; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) return std::nullopt;
        value = value * 10 + (text[i] - '0');
        if (value > 1000000) return std::nullopt;
    }
    return value;
}

// Fills info from text and returns the kind; canonical spelling is stored
// in info.text.
SymbolKind classify(std::string_view text, SymbolInfo& info) {
    info.text = std::string(text);
    if (text == "$") return SymbolKind::nop;
    if (auto j = indexed(text, 'y')) {
        info.index = *j;
        return SymbolKind::param;
    }
    if (auto i = indexed(text, 'x')) {
        info.index = *i;
        return SymbolKind::var;
    }
    if (text.size() >= 2 && text[0] == '@' && is_identifier(text.substr(1))) {
        info.mark = std::string(text.substr(1));
        return SymbolKind::mark;
    }
    if (text.size() >= 2 && text[0] == '#' && is_identifier(text.substr(1))) {
        info.state = std::string(text.substr(1));
        return SymbolKind::sharp;
    }
    if (text.size() >= 2 && text.front() == '{' && text.back() == '}') {
        std::string_view body = text.substr(1, text.size() - 2);
        std::vector<int> out;
        std::size_t pos = 0;
        while (pos < body.size()) {
            std::size_t comma = body.find(',', pos);
            std::string_view part = body.substr(pos, comma == std::string_view::npos ? body.npos
                                                                                   : comma - pos);
            if (part.empty() || part.size() > 6 ||
                !std::all_of(part.begin(), part.end(),
                             [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
                throw Error(ErrorCode::syntax_error, "bad parameter set '" + std::string(text) + "'");
            out.push_back(std::stoi(std::string(part)));
            if (out.back() == 0)
                throw Error(ErrorCode::syntax_error, "bad parameter set '" + std::string(text) + "'");
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
            if (pos == body.size())
                throw Error(ErrorCode::syntax_error, "bad parameter set '" + std::string(text) + "'");
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        std::string canon = "{";
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (k) canon += ",";
            canon += std::to_string(out[k]);
        }
        canon += "}";
        info.text = canon;
        info.indices = std::move(out);
        return SymbolKind::param_set;
    }
    if (text.size() >= 5 && text.front() == '<' && text.back() == '>') {
        std::string_view body = text.substr(1, text.size() - 2);
        std::size_t comma = body.find(',');
        if (comma == std::string_view::npos)
            throw Error(ErrorCode::syntax_error, "bad state call '" + std::string(text) + "'");
        std::string_view state = body.substr(0, comma);
        std::string_view target = body.substr(comma + 1);
        if (!is_identifier(state))
            throw Error(ErrorCode::syntax_error, "bad state call '" + std::string(text) + "'");
        info.state = std::string(state);
        if (auto i = indexed(target, 'x')) {
            info.index = *i;
            return SymbolKind::call;
        }
        if (target.size() >= 2 && target[0] == '@' && is_identifier(target.substr(1))) {
            info.mark = std::string(target.substr(1));
            return SymbolKind::mark_call;
        }
        throw Error(ErrorCode::syntax_error, "bad state call '" + std::string(text) + "'");
    }
    return SymbolKind::plain;
}


struct NodeHash {
    std::size_t operator()(const detail::Node* n) const { return n->hash; }
};

struct NodeEq {
    bool operator()(const detail::Node* a, const detail::Node* b) const {
        return a->label == b->label && a->children == b->children;
    }
};

struct NodeTable {
    std::mutex mutex;
    std::unordered_set<const detail::Node*, NodeHash, NodeEq> nodes;
};

NodeTable& node_table() {
    static NodeTable table;
    return table;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r = a + b;
    return r < a ? UINT64_MAX : r;
}

}  // namespace

Symbol Symbol::intern(std::string_view text) {
    SymbolTable& table = symbol_table();
    {
        std::shared_lock lock(table.mutex);
        auto it = table.ids.find(std::string(text));
        if (it != table.ids.end()) return Symbol(it->second);
    }
    SymbolInfo info;
    SymbolKind kind = classify(text, info);
    std::unique_lock lock(table.mutex);
    auto it = table.ids.find(info.text);
    if (it == table.ids.end()) {
        std::uint32_t index = static_cast<std::uint32_t>(table.infos.size());
        if (index > kIndexMask) throw Error(ErrorCode::internal, "symbol table exhausted");
        std::uint32_t id = (static_cast<std::uint32_t>(kind) << 28) | index;
        table.infos.push_back(info);
        it = table.ids.emplace(info.text, id).first;
    }
    std::uint32_t id = it->second;
    if (info.text != text) table.ids.emplace(std::string(text), id);
    return Symbol(id);
}

Symbol Symbol::param(int index) { return intern("y" + std::to_string(index)); }
Symbol Symbol::var(int index) { return intern("x" + std::to_string(index)); }

Symbol Symbol::call(std::string_view state, int var_index) {
    return intern("<" + std::string(state) + ",x" + std::to_string(var_index) + ">");
}

Symbol Symbol::mark(std::string_view name) { return intern("@" + std::string(name)); }

Symbol Symbol::mark_call(std::string_view state, std::string_view mark_name) {
    return intern("<" + std::string(state) + ",@" + std::string(mark_name) + ">");
}

Symbol Symbol::nop() { return intern("$"); }

Symbol Symbol::param_set(const std::vector<int>& indices) {
    std::string text = "{";
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (k) text += ",";
        text += std::to_string(indices[k]);
    }
    return intern(text + "}");
}

Symbol Symbol::sharp(std::string_view state) { return intern("#" + std::string(state)); }

static const SymbolInfo& info_of(std::uint32_t id) {
    SymbolTable& table = symbol_table();
    std::shared_lock lock(table.mutex);
    return table.infos[id & kIndexMask];
}

const std::string& Symbol::text() const { return info_of(id_).text; }
int Symbol::index() const { return info_of(id_).index; }
const std::string& Symbol::state() const { return info_of(id_).state; }
const std::string& Symbol::mark_name() const { return info_of(id_).mark; }
const std::vector<int>& Symbol::indices() const { return info_of(id_).indices; }

bool is_identifier(std::string_view text) {
    return !text.empty() && std::all_of(text.begin(), text.end(), ident_char);
}

bool is_reserved_name(std::string_view text) {
    return indexed(text, 'x').has_value() || indexed(text, 'y').has_value();
}

RankedAlphabet::RankedAlphabet(std::initializer_list<std::pair<std::string_view, int>> symbols) {
    for (auto& [name, rank] : symbols) add(name, rank);
}

std::size_t RankedAlphabet::add(Symbol symbol, int rank) {
    if (rank < 0) throw Error(ErrorCode::invalid_transducer, "negative rank for " + symbol.text());
    auto it = index_.find(symbol.id());
    if (it != index_.end()) {
        if (symbols_[it->second].rank != rank)
            throw Error(ErrorCode::invalid_transducer,
                        "symbol " + symbol.text() + " declared with ranks " +
                            std::to_string(symbols_[it->second].rank) + " and " +
                            std::to_string(rank));
        return it->second;
    }
    index_.emplace(symbol.id(), symbols_.size());
    symbols_.push_back({symbol, rank});
    return symbols_.size() - 1;
}

std::optional<std::size_t> RankedAlphabet::find(Symbol symbol) const {
    auto it = index_.find(symbol.id());
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

int RankedAlphabet::rank_of(Symbol symbol) const {
    auto i = find(symbol);
    if (!i) throw Error(ErrorCode::unknown_symbol, "unknown symbol " + symbol.text());
    return symbols_[*i].rank;
}

int RankedAlphabet::max_rank() const {
    int r = 0;
    for (auto& s : symbols_) r = std::max(r, s.rank);
    return r;
}

bool operator==(const RankedAlphabet& a, const RankedAlphabet& b) {
    if (a.size() != b.size()) return false;
    for (auto& s : a) {
        auto i = b.find(s.symbol);
        if (!i || b[*i].rank != s.rank) return false;
    }
    return true;
}

Tree Tree::make(Symbol label, std::vector<Tree> children) {
    auto node = std::make_unique<detail::Node>();
    node->label = label;
    std::size_t h = std::hash<std::uint32_t>{}(label.id());
    std::uint64_t size = 1;
    std::uint32_t height = 0;
    std::uint64_t mask = 0;
    for (const Tree& c : children) {
        h = h * 1000003u ^ std::hash<const void*>{}(c.node());
        size = sat_add(size, c.size());
        height = std::max(height, c.height());
        mask |= c.param_mask();
    }
    if (label.kind() == SymbolKind::param) mask |= std::uint64_t{1} << std::min(label.index(), 63);
    node->children = std::move(children);
    node->hash = h;
    node->size = size;
    node->height = height + 1;
    node->param_mask = mask;

    NodeTable& table = node_table();
    std::lock_guard lock(table.mutex);
    auto it = table.nodes.find(node.get());
    if (it != table.nodes.end()) return Tree(*it);
    const detail::Node* raw = node.release();
    table.nodes.insert(raw);
    return Tree(raw);
}

std::size_t interned_node_count() {
    NodeTable& table = node_table();
    std::lock_guard lock(table.mutex);
    return table.nodes.size();
}

static int structural_compare(const Tree& a, const Tree& b) {
    if (a == b) return 0;
    if (a.label() != b.label()) return a.label().text() < b.label().text() ? -1 : 1;
    for (std::size_t i = 0; i < a.arity(); ++i) {
        const Tree& x = a.child(i);
        const Tree& y = b.child(i);
        if (x == y) continue;
        if (x.size() != y.size()) return x.size() < y.size() ? -1 : 1;
        return structural_compare(x, y);
    }
    return 0;
}

bool canonical_less(const Tree& a, const Tree& b) {
    if (a == b) return false;
    if (a.size() != b.size()) return a.size() < b.size();
    return structural_compare(a, b) < 0;
}

Path Path::child(int i) const {
    std::vector<int> s = steps_;
    s.push_back(i);
    return Path(std::move(s));
}

Path Path::parent() const {
    if (steps_.empty()) throw Error(ErrorCode::path_out_of_range, "root has no parent");
    return Path(std::vector<int>(steps_.begin(), steps_.end() - 1));
}

Path Path::prefix(std::size_t length) const {
    if (length > steps_.size()) throw Error(ErrorCode::path_out_of_range, "prefix too long");
    return Path(std::vector<int>(steps_.begin(), steps_.begin() + length));
}

Path Path::suffix_from(std::size_t start) const {
    if (start > steps_.size()) throw Error(ErrorCode::path_out_of_range, "suffix start too large");
    return Path(std::vector<int>(steps_.begin() + start, steps_.end()));
}

bool Path::is_prefix_of(const Path& other) const {
    return steps_.size() <= other.steps_.size() &&
           std::equal(steps_.begin(), steps_.end(), other.steps_.begin());
}

Path Path::concat(const Path& other) const {
    std::vector<int> s = steps_;
    s.insert(s.end(), other.steps_.begin(), other.steps_.end());
    return Path(std::move(s));
}

std::string Path::to_string() const {
    if (steps_.empty()) return "ε";
    std::string out;
    for (std::size_t i = 0; i < steps_.size(); ++i) {
        if (i) out += ".";
        out += std::to_string(steps_[i]);
    }
    return out;
}

Path Path::parse(std::string_view text) {
    if (text.empty() || text == "e" || text == "ε") return Path();
    std::vector<int> steps;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = text.find_first_of(".·", pos);
        std::string_view part = text.substr(pos, dot == text.npos ? text.npos : dot - pos);
        if (part.empty() || !std::all_of(part.begin(), part.end(), [](char c) {
                return std::isdigit(static_cast<unsigned char>(c));
            }))
            throw Error(ErrorCode::syntax_error, "bad path '" + std::string(text) + "'");
        int step = std::stoi(std::string(part));
        if (step < 1) throw Error(ErrorCode::syntax_error, "bad path '" + std::string(text) + "'");
        steps.push_back(step);
        if (dot == text.npos) break;
        // "·" is two bytes in UTF-8.
        pos = dot + (text[dot] == '.' ? 1 : 2);
    }
    return Path(std::move(steps));
}

static const Tree* walk(const Tree& t, const Path& u) {
    const Tree* cur = &t;
    for (int step : u.steps()) {
        if (step < 1 || static_cast<std::size_t>(step) > cur->arity()) return nullptr;
        cur = &cur->child(static_cast<std::size_t>(step - 1));
    }
    return cur;
}

bool has_node(const Tree& t, const Path& u) { return walk(t, u) != nullptr; }

Tree subtree_at(const Tree& t, const Path& u) {
    const Tree* n = walk(t, u);
    if (!n)
        throw Error(ErrorCode::path_out_of_range,
                    "path " + u.to_string() + " not in " + to_string(t));
    return *n;
}

Symbol label_at(const Tree& t, const Path& u) { return subtree_at(t, u).label(); }

static Tree replace_rec(const Tree& t, const Path& u, std::size_t depth, const Tree& r) {
    if (depth == u.length()) return r;
    int step = u[depth];
    if (step < 1 || static_cast<std::size_t>(step) > t.arity())
        throw Error(ErrorCode::path_out_of_range, "path " + u.to_string() + " out of range");
    std::vector<Tree> kids(t.children().begin(), t.children().end());
    kids[step - 1] = replace_rec(kids[step - 1], u, depth + 1, r);
    return Tree::make(t.label(), std::move(kids));
}

Tree replace_at(const Tree& t, const Path& u, const Tree& replacement) {
    return replace_rec(t, u, 0, replacement);
}

static void collect_nodes(const Tree& t, std::vector<int>& cur, std::vector<Path>& out) {
    out.emplace_back(cur);
    for (std::size_t i = 0; i < t.arity(); ++i) {
        cur.push_back(static_cast<int>(i + 1));
        collect_nodes(t.child(i), cur, out);
        cur.pop_back();
    }
}

std::vector<Path> nodes(const Tree& t) {
    std::vector<Path> out;
    std::vector<int> cur;
    collect_nodes(t, cur, out);
    return out;
}

namespace {

using Memo = std::unordered_map<const detail::Node*, Tree>;

Tree first_rec(const Tree& t, const std::map<Symbol, Tree>& b, Memo& memo) {
    auto hit = memo.find(t.node());
    if (hit != memo.end()) return hit->second;
    Tree out;
    auto it = b.find(t.label());
    if (it != b.end()) {
        if (t.arity() != 0)
            throw Error(ErrorCode::non_nullary_symbol,
                        "bound symbol " + t.label().text() + " occurs with children");
        out = it->second;
    } else if (t.arity() == 0) {
        out = t;
    } else {
        std::vector<Tree> kids;
        kids.reserve(t.arity());
        bool same = true;
        for (const Tree& c : t.children()) {
            kids.push_back(first_rec(c, b, memo));
            same = same && kids.back() == c;
        }
        out = same ? t : Tree::make(t.label(), std::move(kids));
    }
    memo.emplace(t.node(), out);
    return out;
}

Tree params_rec(const Tree& t, std::span<const Tree> args, Memo& memo) {
    if (t.param_mask() == 0) return t;
    if (t.label().kind() == SymbolKind::param) {
        int j = t.label().index();
        if (j >= 1 && static_cast<std::size_t>(j) <= args.size()) return args[j - 1];
        return t;
    }
    auto hit = memo.find(t.node());
    if (hit != memo.end()) return hit->second;
    std::vector<Tree> kids;
    kids.reserve(t.arity());
    for (const Tree& c : t.children()) kids.push_back(params_rec(c, args, memo));
    Tree out = Tree::make(t.label(), std::move(kids));
    memo.emplace(t.node(), out);
    return out;
}

int max_param(const Tree& t) {
    std::uint64_t m = t.param_mask();
    if (m == 0) return 0;
    if (m >> 63) {
        int best = 0;
        std::unordered_set<const detail::Node*> seen;
        std::vector<Tree> stack{t};
        while (!stack.empty()) {
            Tree cur = stack.back();
            stack.pop_back();
            if (!seen.insert(cur.node()).second || cur.param_mask() == 0) continue;
            if (cur.label().kind() == SymbolKind::param) best = std::max(best, cur.label().index());
            for (const Tree& c : cur.children()) stack.push_back(c);
        }
        return best;
    }
    return 63 - __builtin_clzll(m);
}

Tree second_rec(const Tree& t, const std::map<Symbol, Tree>& b, Memo& memo) {
    auto hit = memo.find(t.node());
    if (hit != memo.end()) return hit->second;
    std::vector<Tree> kids;
    kids.reserve(t.arity());
    bool same = true;
    for (const Tree& c : t.children()) {
        kids.push_back(second_rec(c, b, memo));
        same = same && kids.back() == c;
    }
    Tree out;
    auto it = b.find(t.label());
    if (it != b.end()) {
        if (max_param(it->second) > static_cast<int>(t.arity()))
            throw Error(ErrorCode::param_out_of_arity,
                        "image of " + t.label().text() + " mentions y" +
                            std::to_string(max_param(it->second)) + " but the occurrence has " +
                            std::to_string(t.arity()) + " children");
        out = substitute_params(it->second, kids);
    } else {
        out = same ? t : Tree::make(t.label(), std::move(kids));
    }
    memo.emplace(t.node(), out);
    return out;
}

}  // namespace

Tree first_order_subst(const Tree& t, const std::map<Symbol, Tree>& bindings) {
    Memo memo;
    return first_rec(t, bindings, memo);
}

Tree substitute_params(const Tree& t, std::span<const Tree> args) {
    Memo memo;
    return params_rec(t, args, memo);
}

Tree second_order_subst(const Tree& t, const std::map<Symbol, Tree>& bindings) {
    Memo memo;
    return second_rec(t, bindings, memo);
}

std::vector<Tree> subtrees(const Tree& t) {
    std::vector<Tree> out;
    std::unordered_set<const detail::Node*> seen;
    std::vector<Tree> stack{t};
    while (!stack.empty()) {
        Tree cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur.node()).second) continue;
        out.push_back(cur);
        for (const Tree& c : cur.children()) stack.push_back(c);
    }
    return out;
}

std::uint64_t distinct_subtree_count(const Tree& t) {
    std::unordered_set<const detail::Node*> seen;
    std::vector<const detail::Node*> stack{t.node()};
    while (!stack.empty()) {
        const detail::Node* cur = stack.back();
        stack.pop_back();
        if (!seen.insert(cur).second) continue;
        for (const Tree& c : cur->children) stack.push_back(c.node());
    }
    return seen.size();
}

TreeMetrics metrics(const Tree& t) {
    return TreeMetrics{t.size(), t.height(), distinct_subtree_count(t)};
}

std::vector<int> params_of(const Tree& t) {
    std::vector<int> out;
    if (t.param_mask() == 0) return out;
    for (const Tree& s : subtrees(t))
        if (s.label().kind() == SymbolKind::param) out.push_back(s.label().index());
    std::sort(out.begin(), out.end());
    return out;
}

static bool may_contain(const Tree& t, int j) {
    return (t.param_mask() >> std::min(j, 63)) & 1;
}

static std::optional<std::uint32_t> depth_rec(
    const Tree& t, int j, Symbol y,
    std::unordered_map<const detail::Node*, std::optional<std::uint32_t>>& memo) {
    if (!may_contain(t, j)) return std::nullopt;
    if (t.label() == y) return 0u;
    auto hit = memo.find(t.node());
    if (hit != memo.end()) return hit->second;
    std::optional<std::uint32_t> best;
    for (const Tree& c : t.children()) {
        auto d = depth_rec(c, j, y, memo);
        if (d && (!best || *d + 1 > *best)) best = *d + 1;
    }
    memo.emplace(t.node(), best);
    return best;
}

std::optional<std::uint32_t> param_depth(const Tree& t, int j) {
    std::unordered_map<const detail::Node*, std::optional<std::uint32_t>> memo;
    return depth_rec(t, j, Symbol::param(j), memo);
}

bool contains_label(const Tree& t, Symbol label) {
    for (const Tree& s : subtrees(t))
        if (s.label() == label) return true;
    return false;
}

static std::uint64_t count_rec(const Tree& t, Symbol label,
                               std::unordered_map<const detail::Node*, std::uint64_t>& memo) {
    auto hit = memo.find(t.node());
    if (hit != memo.end()) return hit->second;
    std::uint64_t n = t.label() == label ? 1 : 0;
    for (const Tree& c : t.children()) n = sat_add(n, count_rec(c, label, memo));
    memo.emplace(t.node(), n);
    return n;
}

std::uint64_t count_label(const Tree& t, Symbol label) {
    std::unordered_map<const detail::Node*, std::uint64_t> memo;
    return count_rec(t, label, memo);
}

namespace {

class TreeParser {
public:
    explicit TreeParser(std::string_view text) : text_(text) {}

    Tree parse_all() {
        Tree t = parse();
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input");
        return t;
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw SyntaxError(1, static_cast<int>(pos_) + 1, what);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string read_bracketed(char close) {
        std::string out;
        out += text_[pos_++];
        while (pos_ < text_.size() && text_[pos_] != close) {
            if (!std::isspace(static_cast<unsigned char>(text_[pos_]))) out += text_[pos_];
            ++pos_;
        }
        if (pos_ == text_.size()) fail(std::string("missing '") + close + "'");
        out += text_[pos_++];
        return out;
    }

    Symbol read_label() {
        skip_ws();
        if (pos_ == text_.size()) fail("expected a symbol");
        std::size_t start = pos_;
        std::string token;
        char c = text_[pos_];
        if (c == '<') {
            token = read_bracketed('>');
        } else if (c == '{') {
            token = read_bracketed('}');
        } else {
            while (pos_ < text_.size() && (ident_char(text_[pos_]) || text_[pos_] == '@' ||
                                           text_[pos_] == '#' || text_[pos_] == '$'))
                ++pos_;
            token = std::string(text_.substr(start, pos_ - start));
            if (token.empty()) fail(std::string("unexpected '") + c + "'");
        }
        try {
            return Symbol::intern(token);
        } catch (const SyntaxError&) {
            throw;
        } catch (const Error& e) {
            pos_ = start;
            fail(e.what());
        }
    }

    Tree parse() {
        Symbol label = read_label();
        skip_ws();
        std::vector<Tree> kids;
        if (pos_ < text_.size() && text_[pos_] == '(') {
            ++pos_;
            skip_ws();
            if (pos_ < text_.size() && text_[pos_] == ')') {
                ++pos_;
                return Tree::make(label);
            }
            while (true) {
                kids.push_back(parse());
                skip_ws();
                if (pos_ == text_.size()) fail("missing ')'");
                if (text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (text_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                fail(std::string("expected ',' or ')' but found '") + text_[pos_] + "'");
            }
        }
        return Tree::make(label, std::move(kids));
    }
};

void print_rec(const Tree& t, std::string& out) {
    out += t.label().text();
    if (t.arity() == 0) return;
    out += '(';
    for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ", ";
        print_rec(t.child(i), out);
    }
    out += ')';
}

}  // namespace

Tree parse_tree(std::string_view text) { return TreeParser(text).parse_all(); }

std::string to_string(const Tree& t) {
    if (!t.valid()) return "<null>";
    std::string out;
    print_rec(t, out);
    return out;
}

std::ostream& operator<<(std::ostream& os, const Tree& t) { return os << to_string(t); }

}  // namespace mttlab
