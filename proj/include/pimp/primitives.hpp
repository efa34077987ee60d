#pragma once

// Primitive set and expression trees.
//
// A tree is stored as its preorder sequence of symbols. Node addresses are
// preorder positions (root = 0), and the subtree rooted at address i occupies
// the contiguous range [i, subtree_end(i)).

#include <algorithm>
#include <array>
#include <cctype>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pimp {

/// Invalid run configuration or evaluation context (e.g. an unbound variable).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

enum class Symbol : std::uint8_t { add, sub, mul, pdiv, sin, cos, exp, plog, var_x, var_y };

inline constexpr std::array<Symbol, 8> kFunctions = {Symbol::add, Symbol::sub, Symbol::mul,
                                                     Symbol::pdiv, Symbol::sin, Symbol::cos,
                                                     Symbol::exp, Symbol::plog};
inline constexpr std::array<Symbol, 2> kVariables = {Symbol::var_x, Symbol::var_y};
inline constexpr std::size_t kSymbolCount = 10;

constexpr int arity(Symbol s) noexcept {
    switch (s) {
        case Symbol::add:
        case Symbol::sub:
        case Symbol::mul:
        case Symbol::pdiv: return 2;
        case Symbol::sin:
        case Symbol::cos:
        case Symbol::exp:
        case Symbol::plog: return 1;
        default: return 0;
    }
}

constexpr bool is_terminal(Symbol s) noexcept { return arity(s) == 0; }

/// Input slot read by a terminal symbol.
constexpr std::size_t variable_index(Symbol s) noexcept {
    return static_cast<std::size_t>(s) - static_cast<std::size_t>(Symbol::var_x);
}

constexpr std::string_view name(Symbol s) noexcept {
    constexpr std::array<std::string_view, kSymbolCount> names = {
        "add", "sub", "mul", "pdiv", "sin", "cos", "exp", "plog", "x", "y"};
    return names[static_cast<std::size_t>(s)];
}

inline bool symbol_from_name(std::string_view text, Symbol& out) noexcept {
    for (std::size_t i = 0; i < kSymbolCount; ++i) {
        if (name(static_cast<Symbol>(i)) == text) {
            out = static_cast<Symbol>(i);
            return true;
        }
    }
    return false;
}

/// Terminal set for a problem with `input_arity` variables (x, or x and y).
inline std::span<const Symbol> terminals_for(std::size_t input_arity) {
    if (input_arity < 1 || input_arity > kVariables.size())
        throw ConfigError("unsupported input arity " + std::to_string(input_arity));
    return std::span<const Symbol>(kVariables.data(), input_arity);
}

// Protected operator semantics. Overflowing arithmetic saturates at +/-DBL_MAX
// so every operator maps finite inputs to a finite output.
namespace ops {

inline double saturate(double v) noexcept {
    if (std::isinf(v)) return v > 0 ? DBL_MAX : -DBL_MAX;
    return v;
}

inline double add(double a, double b) noexcept { return saturate(a + b); }
inline double sub(double a, double b) noexcept { return saturate(a - b); }
inline double mul(double a, double b) noexcept { return saturate(a * b); }
inline double pdiv(double a, double b) noexcept { return b == 0.0 ? 1.0 : saturate(a / b); }
inline double exp(double a) noexcept { return std::exp(std::clamp(a, -700.0, 700.0)); }
inline double plog(double a) noexcept { return a == 0.0 ? 0.0 : std::log(std::fabs(a)); }

}  // namespace ops

class ExprTree {
public:
    ExprTree() = default;

    /// Builds a tree from a preorder symbol sequence; throws std::invalid_argument
    /// unless the sequence describes exactly one complete tree.
    explicit ExprTree(std::vector<Symbol> preorder) : nodes_(std::move(preorder)) {
        if (nodes_.empty()) throw std::invalid_argument("empty expression tree");
        std::ptrdiff_t need = 1;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (need == 0) throw std::invalid_argument("trailing nodes after a complete tree");
            need += arity(nodes_[i]) - 1;
        }
        if (need != 0) throw std::invalid_argument("incomplete expression tree");
    }

    static ExprTree terminal(Symbol s) { return ExprTree(std::vector<Symbol>{s}); }

    std::span<const Symbol> nodes() const noexcept { return nodes_; }
    Symbol root() const noexcept { return nodes_.front(); }
    Symbol at(std::size_t address) const { return nodes_.at(address); }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// One past the last address of the subtree rooted at `address`.
    std::size_t subtree_end(std::size_t address) const noexcept {
        std::ptrdiff_t need = 1;
        std::size_t j = address;
        while (need > 0) need += arity(nodes_[j++]) - 1;
        return j;
    }

    /// Single node has depth 1.
    int depth() const noexcept {
        int best = 0;
        std::vector<int> pending;
        pending.reserve(32);
        for (Symbol s : nodes_) {
            best = std::max(best, static_cast<int>(pending.size()) + 1);
            if (arity(s) > 0) {
                pending.push_back(arity(s));
                continue;
            }
            while (!pending.empty() && --pending.back() == 0) pending.pop_back();
        }
        return best;
    }

    /// Copy of this tree with the subtree at `address` replaced by the subtree of
    /// `donor` rooted at `donor_address`.
    ExprTree replace_subtree(std::size_t address, const ExprTree& donor,
                             std::size_t donor_address) const {
        return replace_subtree(address, donor.nodes_.begin() + static_cast<std::ptrdiff_t>(donor_address),
                               donor.nodes_.begin() +
                                   static_cast<std::ptrdiff_t>(donor.subtree_end(donor_address)));
    }

    ExprTree replace_subtree(std::size_t address, const ExprTree& donor) const {
        return replace_subtree(address, donor, 0);
    }

    /// Highest variable slot referenced plus one (0 if none).
    std::size_t variables_used() const noexcept {
        std::size_t n = 0;
        for (Symbol s : nodes_)
            if (is_terminal(s)) n = std::max(n, variable_index(s) + 1);
        return n;
    }

    friend bool operator==(const ExprTree&, const ExprTree&) = default;

private:
    using Iter = std::vector<Symbol>::const_iterator;

    ExprTree replace_subtree(std::size_t address, Iter first, Iter last) const {
        std::vector<Symbol> out;
        const auto begin = nodes_.begin() + static_cast<std::ptrdiff_t>(address);
        const auto end = nodes_.begin() + static_cast<std::ptrdiff_t>(subtree_end(address));
        out.reserve(nodes_.size() - static_cast<std::size_t>(end - begin) +
                    static_cast<std::size_t>(last - first));
        out.insert(out.end(), nodes_.begin(), begin);
        out.insert(out.end(), first, last);
        out.insert(out.end(), end, nodes_.end());
        ExprTree t;
        t.nodes_ = std::move(out);
        return t;
    }

    std::vector<Symbol> nodes_{Symbol::var_x};
};

inline std::size_t size(const ExprTree& t) noexcept { return t.size(); }
inline int depth(const ExprTree& t) noexcept { return t.depth(); }

/// Canonical prefix form: "(symbol child1 ... childN)", terminals bare.
inline std::string serialize(const ExprTree& tree) {
    std::string out;
    out.reserve(tree.size() * 5);
    std::vector<int> pending;
    for (Symbol s : tree.nodes()) {
        if (!pending.empty()) out += ' ';
        if (arity(s) > 0) {
            out += '(';
            out += name(s);
            pending.push_back(arity(s));
            continue;
        }
        out += name(s);
        while (!pending.empty() && --pending.back() == 0) {
            pending.pop_back();
            out += ')';
        }
    }
    return out;
}

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    ExprTree parse() {
        std::vector<Symbol> nodes;
        skip_space();
        expression(nodes);
        skip_space();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return ExprTree(std::move(nodes));
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    std::string_view identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if (start == pos_) throw ParseError("expected a symbol", start);
        return text_.substr(start, pos_ - start);
    }

    void expression(std::vector<Symbol>& nodes) {
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        if (text_[pos_] == ')') throw ParseError("unexpected ')'", pos_);
        if (text_[pos_] != '(') {
            const std::size_t at = pos_;
            Symbol s{};
            if (!symbol_from_name(identifier(), s)) throw ParseError("unknown symbol", at);
            if (!is_terminal(s)) throw ParseError("function symbol used as a terminal", at);
            nodes.push_back(s);
            return;
        }
        const std::size_t open = pos_++;
        skip_space();
        const std::size_t at = pos_;
        Symbol s{};
        if (!symbol_from_name(identifier(), s)) throw ParseError("unknown symbol", at);
        if (is_terminal(s)) throw ParseError("terminal in function position", at);
        nodes.push_back(s);
        int children = 0;
        for (;;) {
            skip_space();
            if (pos_ >= text_.size()) throw ParseError("unclosed '('", open);
            if (text_[pos_] == ')') break;
            expression(nodes);
            ++children;
        }
        if (children != arity(s))
            throw ParseError("arity mismatch for '" + std::string(name(s)) + "': expected " +
                                 std::to_string(arity(s)) + ", got " + std::to_string(children),
                             open);
        ++pos_;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline ExprTree parse(std::string_view text) { return detail::Parser(text).parse(); }

/// Evaluates the tree at a single point.
inline double eval_tree(const ExprTree& tree, std::span<const double> point) {
    if (tree.variables_used() > point.size())
        throw ConfigError("tree references a variable not supplied by the point");
    const auto nodes = tree.nodes();
    std::vector<double> stack;
    stack.reserve(nodes.size());
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const Symbol s = nodes[i];
        if (is_terminal(s)) {
            stack.push_back(point[variable_index(s)]);
            continue;
        }
        if (arity(s) == 1) {
            double& a = stack.back();
            switch (s) {
                case Symbol::sin: a = std::sin(a); break;
                case Symbol::cos: a = std::cos(a); break;
                case Symbol::exp: a = ops::exp(a); break;
                default: a = ops::plog(a); break;
            }
            continue;
        }
        // Reverse preorder: the first child sits on top.
        const double a = stack.back();
        stack.pop_back();
        double& b = stack.back();
        switch (s) {
            case Symbol::add: b = ops::add(a, b); break;
            case Symbol::sub: b = ops::sub(a, b); break;
            case Symbol::mul: b = ops::mul(a, b); break;
            default: b = ops::pdiv(a, b); break;
        }
    }
    return stack.back();
}

/// Evaluates the tree on every row of column-major inputs (`columns[v][row]`),
/// writing one output per row. `scratch` is reusable workspace.
inline void eval_columns(const ExprTree& tree, std::span<const std::vector<double>> columns,
                         std::vector<double>& out, std::vector<double>& scratch) {
    if (tree.variables_used() > columns.size())
        throw ConfigError("tree references a variable not supplied by the fitness cases");
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    const auto nodes = tree.nodes();

    std::size_t height = 0, max_height = 0;
    for (std::size_t i = nodes.size(); i-- > 0;) {
        height = height + 1 - static_cast<std::size_t>(arity(nodes[i]));
        max_height = std::max(max_height, height);
    }
    scratch.resize(max_height * rows);

    std::size_t top = 0;  // number of live slots
    auto slot = [&](std::size_t k) { return scratch.data() + k * rows; };
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const Symbol s = nodes[i];
        if (is_terminal(s)) {
            const auto& col = columns[variable_index(s)];
            std::copy(col.begin(), col.end(), slot(top++));
            continue;
        }
        if (arity(s) == 1) {
            double* a = slot(top - 1);
            switch (s) {
                case Symbol::sin: for (std::size_t r = 0; r < rows; ++r) a[r] = std::sin(a[r]); break;
                case Symbol::cos: for (std::size_t r = 0; r < rows; ++r) a[r] = std::cos(a[r]); break;
                case Symbol::exp: for (std::size_t r = 0; r < rows; ++r) a[r] = ops::exp(a[r]); break;
                default: for (std::size_t r = 0; r < rows; ++r) a[r] = ops::plog(a[r]); break;
            }
            continue;
        }
        const double* a = slot(top - 1);
        double* b = slot(top - 2);
        switch (s) {
            case Symbol::add: for (std::size_t r = 0; r < rows; ++r) b[r] = ops::add(a[r], b[r]); break;
            case Symbol::sub: for (std::size_t r = 0; r < rows; ++r) b[r] = ops::sub(a[r], b[r]); break;
            case Symbol::mul: for (std::size_t r = 0; r < rows; ++r) b[r] = ops::mul(a[r], b[r]); break;
            default: for (std::size_t r = 0; r < rows; ++r) b[r] = ops::pdiv(a[r], b[r]); break;
        }
        --top;
    }
    out.assign(slot(0), slot(0) + rows);
}

inline std::vector<double> eval_columns(const ExprTree& tree,
                                        std::span<const std::vector<double>> columns) {
    std::vector<double> out, scratch;
    eval_columns(tree, columns, out, scratch);
    return out;
}

/// Mean squared error between two equally sized output vectors, saturated at DBL_MAX.
inline double mean_squared_error(std::span<const double> outputs, std::span<const double> targets) {
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i) {
        const double d = outputs[i] - targets[i];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(outputs.size());
    return std::isfinite(mse) ? mse : DBL_MAX;
}

}  // namespace pimp
