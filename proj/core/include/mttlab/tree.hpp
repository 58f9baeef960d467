#pragma once

// Ranked symbols, hash-consed trees, node addressing and the two
// substitution calculi.
//
// Every label is an interned string.  Its kind is fixed by its spelling:
//
//   y3        parameter              <q,x2>   state call on input variable x2
//   x2        input variable         <q,@p>   provisional call on a marked leaf
//   @p        marked input leaf      #q       state marker (rank 1)
//   $         pruned branch          {1,3}    parameter-index set (rank 0)
//
// Anything else is an ordinary alphabet symbol.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mttlab/error.hpp"

namespace mttlab {

enum class SymbolKind : std::uint8_t {
    plain,
    param,
    var,
    call,
    mark,
    mark_call,
    nop,
    param_set,
    sharp,
};

class Symbol {
public:
    Symbol() = default;

    static Symbol intern(std::string_view text);
    static Symbol param(int index);
    static Symbol var(int index);
    static Symbol call(std::string_view state, int var_index);
    static Symbol mark(std::string_view name);
    static Symbol mark_call(std::string_view state, std::string_view mark_name);
    static Symbol nop();
    static Symbol param_set(const std::vector<int>& indices);
    static Symbol sharp(std::string_view state);

    std::uint32_t id() const { return id_; }
    bool valid() const { return id_ != 0; }
    const std::string& text() const;
    // The kind lives in the top bits of the id.
    SymbolKind kind() const { return static_cast<SymbolKind>(id_ >> 28); }

    // param/var: the index; call: the input variable index.
    int index() const;
    // call/mark_call/sharp: the state name.
    const std::string& state() const;
    // mark/mark_call: the mark name (without '@').
    const std::string& mark_name() const;
    // param_set: sorted indices.
    const std::vector<int>& indices() const;

    bool is_param() const { return kind() == SymbolKind::param; }

    friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
    friend bool operator!=(Symbol a, Symbol b) { return a.id_ != b.id_; }
    friend bool operator<(Symbol a, Symbol b) { return a.id_ < b.id_; }

private:
    explicit Symbol(std::uint32_t id) : id_(id) {}
    std::uint32_t id_ = 0;
};

// True for [A-Za-z0-9_'.~]+ that does not collide with the reserved
// parameter/variable spellings.
bool is_identifier(std::string_view text);
bool is_reserved_name(std::string_view text);

struct RankedSymbol {
    Symbol symbol;
    int rank = 0;
};

// Ordered set of (symbol, rank); declaration order is significant for
// deterministic enumeration.
class RankedAlphabet {
public:
    RankedAlphabet() = default;
    RankedAlphabet(std::initializer_list<std::pair<std::string_view, int>> symbols);

    // Returns the index; throws invalid_transducer on a rank conflict.
    std::size_t add(Symbol symbol, int rank);
    std::size_t add(std::string_view name, int rank) { return add(Symbol::intern(name), rank); }

    std::optional<std::size_t> find(Symbol symbol) const;
    bool contains(Symbol symbol) const { return find(symbol).has_value(); }
    int rank_of(Symbol symbol) const;

    std::size_t size() const { return symbols_.size(); }
    const RankedSymbol& operator[](std::size_t i) const { return symbols_[i]; }
    std::span<const RankedSymbol> symbols() const { return symbols_; }
    int max_rank() const;

    auto begin() const { return symbols_.begin(); }
    auto end() const { return symbols_.end(); }

    friend bool operator==(const RankedAlphabet& a, const RankedAlphabet& b);

private:
    std::vector<RankedSymbol> symbols_;
    std::map<std::uint32_t, std::size_t> index_;
};

namespace detail {
struct Node;
}

// Immutable, hash-consed ranked tree.  Two trees are equal iff they are the
// same interned node, so comparison and hashing are O(1).
class Tree {
public:
    Tree() = default;

    static Tree make(Symbol label, std::vector<Tree> children = {});
    static Tree leaf(Symbol label) { return make(label); }
    static Tree leaf(std::string_view label) { return make(Symbol::intern(label)); }

    bool valid() const { return node_ != nullptr; }
    Symbol label() const;
    std::size_t arity() const;
    // 0-based child access.
    const Tree& child(std::size_t i) const;
    std::span<const Tree> children() const;

    // Number of nodes, saturating at UINT64_MAX.
    std::uint64_t size() const;
    // A single node has height 1.
    std::uint32_t height() const;
    // Bit j set iff parameter y_j occurs (j < 64).
    std::uint64_t param_mask() const;
    bool has_params() const { return param_mask() != 0; }

    const detail::Node* node() const { return node_; }

    friend bool operator==(const Tree& a, const Tree& b) { return a.node_ == b.node_; }
    friend bool operator!=(const Tree& a, const Tree& b) { return a.node_ != b.node_; }

private:
    explicit Tree(const detail::Node* node) : node_(node) {}
    const detail::Node* node_ = nullptr;
    friend struct detail::Node;
    friend class TreeFactory;
};

namespace detail {
struct Node {
    Symbol label;
    std::vector<Tree> children;
    std::size_t hash = 0;
    std::uint64_t size = 1;
    std::uint32_t height = 1;
    std::uint64_t param_mask = 0;
};
}  // namespace detail

inline Symbol Tree::label() const { return node_->label; }
inline std::size_t Tree::arity() const { return node_->children.size(); }
inline const Tree& Tree::child(std::size_t i) const { return node_->children[i]; }
inline std::span<const Tree> Tree::children() const { return node_->children; }
inline std::uint64_t Tree::size() const { return node_->size; }
inline std::uint32_t Tree::height() const { return node_->height; }
inline std::uint64_t Tree::param_mask() const { return node_->param_mask; }

struct TreeHash {
    std::size_t operator()(const Tree& t) const {
        return std::hash<const void*>{}(t.node());
    }
};

// Total order: by size, then by root label text, then by the first
// differing child (smaller size first, then recursively).  Never prints.
bool canonical_less(const Tree& a, const Tree& b);

// A node address: sequence of 1-based child indices, empty for the root.
class Path {
public:
    Path() = default;
    Path(std::initializer_list<int> steps) : steps_(steps) {}
    explicit Path(std::vector<int> steps) : steps_(std::move(steps)) {}

    bool empty() const { return steps_.empty(); }
    std::size_t length() const { return steps_.size(); }
    int operator[](std::size_t i) const { return steps_[i]; }
    const std::vector<int>& steps() const { return steps_; }

    Path child(int i) const;
    Path parent() const;
    Path prefix(std::size_t length) const;
    Path suffix_from(std::size_t start) const;
    bool is_prefix_of(const Path& other) const;
    bool is_strict_prefix_of(const Path& other) const {
        return steps_.size() < other.steps_.size() && is_prefix_of(other);
    }
    Path concat(const Path& other) const;

    // "ε" for the root, otherwise dot-separated steps such as "1.2.1".
    // parse() also accepts "e" and the empty string for the root.
    std::string to_string() const;
    static Path parse(std::string_view text);

    friend bool operator==(const Path&, const Path&) = default;
    friend auto operator<=>(const Path&, const Path&) = default;

private:
    std::vector<int> steps_;
};

// Node access.  Throws path_out_of_range.
Symbol label_at(const Tree& t, const Path& u);
Tree subtree_at(const Tree& t, const Path& u);
bool has_node(const Tree& t, const Path& u);
Tree replace_at(const Tree& t, const Path& u, const Tree& replacement);
// All node addresses in pre-order.
std::vector<Path> nodes(const Tree& t);

// Replaces every occurrence of each bound rank-0 symbol; substituted
// material is not rescanned.  Throws non_nullary_symbol when a bound symbol
// occurs with children.
Tree first_order_subst(const Tree& t, const std::map<Symbol, Tree>& bindings);

// Replaces y_j by args[j-1]; parameters beyond args.size() stay.
Tree substitute_params(const Tree& t, std::span<const Tree> args);

// s[[sigma_i <- t_i]]: an occurrence sigma(s_1..s_k) of a bound symbol
// becomes its image with y_j bound to the substituted j-th child.  Throws
// param_out_of_arity when an image mentions y_j with j > k.
Tree second_order_subst(const Tree& t, const std::map<Symbol, Tree>& bindings);

struct TreeMetrics {
    std::uint64_t size = 0;
    std::uint32_t height = 0;
    std::uint64_t distinct_subtrees = 0;
};

TreeMetrics metrics(const Tree& t);
std::vector<Tree> subtrees(const Tree& t);
std::uint64_t distinct_subtree_count(const Tree& t);

// Parameters occurring in t, ascending.
std::vector<int> params_of(const Tree& t);
// Maximum number of proper ancestors of an occurrence of y_j; nullopt if
// y_j does not occur.
std::optional<std::uint32_t> param_depth(const Tree& t, int j);
bool contains_label(const Tree& t, Symbol label);
std::uint64_t count_label(const Tree& t, Symbol label);

// Textual syntax: f(a, g(b)).  Nullary parentheses are optional on input
// and never printed.
Tree parse_tree(std::string_view text);
std::string to_string(const Tree& t);
std::ostream& operator<<(std::ostream& os, const Tree& t);

// Number of interned nodes currently alive (for diagnostics).
std::size_t interned_node_count();

}  // namespace mttlab
