#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "pimp/individual.hpp"
#include "pimp/primitives.hpp"
#include "pimp/random.hpp"

using namespace pimp;

namespace {

double at(std::string_view text, std::vector<double> point) { return eval_tree(parse(text), point); }

}  // namespace

TEST(EvalTree, Arithmetic) {
    EXPECT_DOUBLE_EQ(at("(add x (mul x x))", {2.0}), 6.0);
    EXPECT_DOUBLE_EQ(at("(sub y x)", {1.0, 5.0}), 4.0);
    EXPECT_DOUBLE_EQ(at("(pdiv x y)", {1.0, 4.0}), 0.25);
    EXPECT_DOUBLE_EQ(at("(cos x)", {0.0}), 1.0);
}

TEST(EvalTree, ProtectedDivisionByZeroIsOne) { EXPECT_EQ(at("(pdiv x (sub x x))", {3.0}), 1.0); }

TEST(EvalTree, ProtectedLogOfZeroIsZero) {
    EXPECT_EQ(at("(plog x)", {0.0}), 0.0);
    EXPECT_DOUBLE_EQ(at("(plog x)", {-std::exp(2.0)}), 2.0);
}

TEST(EvalTree, ExpSaturates) {
    const double v = at("(exp x)", {1000.0});
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(v, std::exp(700.0));
    EXPECT_EQ(at("(exp x)", {-1000.0}), std::exp(-700.0));
}

TEST(EvalTree, OverflowSaturates) {
    EXPECT_TRUE(std::isfinite(at("(mul (exp x) (exp x))", {700.0})));
    EXPECT_TRUE(std::isfinite(at("(sin (mul (exp x) (exp x)))", {700.0})));
}

TEST(EvalTree, UnboundVariableIsConfigError) {
    EXPECT_THROW(at("(add x y)", {1.0}), ConfigError);
    const std::vector<std::vector<double>> cols{{1.0, 2.0}};
    EXPECT_THROW(eval_columns(parse("y"), cols), ConfigError);
}

TEST(EvalTree, ColumnsMatchPointwise) {
    Rng rng(7);
    const std::vector<std::vector<double>> cols{{-1.5, 0.0, 0.3, 2.0}, {4.0, -0.5, 0.0, 1.0}};
    for (int i = 0; i < 200; ++i) {
        const auto t = random_tree(TreeMethod::grow, 8, terminals_for(2), rng);
        const auto out = eval_columns(t, cols);
        for (std::size_t r = 0; r < 4; ++r)
            EXPECT_EQ(out[r], eval_tree(t, std::vector<double>{cols[0][r], cols[1][r]}));
    }
}

TEST(Serialize, Examples) {
    EXPECT_EQ(serialize(parse("(add x x)")), "(add x x)");
    EXPECT_EQ(serialize(ExprTree::terminal(Symbol::var_x)), "x");
    EXPECT_EQ(serialize(parse("  ( sin\n(cos  y) ) ")), "(sin (cos y))");
}

TEST(Parse, Errors) {
    EXPECT_THROW(parse("(sin)"), ParseError);
    EXPECT_THROW(parse("(add x)"), ParseError);
    EXPECT_THROW(parse("(sin x x)"), ParseError);
    EXPECT_THROW(parse("(foo x)"), ParseError);
    EXPECT_THROW(parse("(x)"), ParseError);
    EXPECT_THROW(parse("add"), ParseError);
    EXPECT_THROW(parse("(sin x"), ParseError);
    EXPECT_THROW(parse("x y"), ParseError);
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse(")"), ParseError);
}

TEST(Parse, ErrorCarriesPosition) {
    try {
        parse("(add x (sin))");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 7u);
    }
    try {
        parse("(add x q)");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 7u);
    }
}

TEST(Shape, DepthAndSize) {
    EXPECT_EQ(depth(parse("x")), 1);
    EXPECT_EQ(size(parse("x")), 1u);
    EXPECT_EQ(depth(parse("(add x x)")), 2);
    EXPECT_EQ(size(parse("(add x x)")), 3u);
    EXPECT_EQ(depth(parse("(sin (sin (sin x)))")), 4);
    EXPECT_EQ(size(parse("(sin (sin (sin x)))")), 4u);
    EXPECT_EQ(depth(parse("(add (sin (cos x)) y)")), 4);
}

TEST(Shape, SubtreeEnd) {
    const auto t = parse("(add (sin x) (mul x y))");
    EXPECT_EQ(t.subtree_end(0), 6u);
    EXPECT_EQ(t.subtree_end(1), 3u);
    EXPECT_EQ(t.subtree_end(3), 6u);
    EXPECT_EQ(t.subtree_end(5), 6u);
}

TEST(Shape, RejectsMalformedPreorder) {
    EXPECT_THROW(ExprTree(std::vector<Symbol>{Symbol::add, Symbol::var_x}), std::invalid_argument);
    EXPECT_THROW(ExprTree(std::vector<Symbol>{Symbol::var_x, Symbol::var_x}), std::invalid_argument);
    EXPECT_THROW(ExprTree(std::vector<Symbol>{}), std::invalid_argument);
}

// Properties over random trees up to the depth cap.

TEST(Properties, TotalityOnRandomTreesAndInputs) {
    Rng rng(2024);
    for (int i = 0; i < 300; ++i) {
        const int d = uniform_int(rng, 1, 17);
        const auto t = random_tree(TreeMethod::grow, d, terminals_for(2), rng);
        for (int k = 0; k < 5; ++k) {
            const double scale = std::pow(10.0, uniform_int(rng, -3, 300));
            const std::vector<double> p{uniform_real(rng, -scale, scale), uniform_real(rng, -scale, scale)};
            EXPECT_TRUE(std::isfinite(eval_tree(t, p))) << serialize(t);
        }
    }
}

TEST(Properties, RoundTrip) {
    Rng rng(99);
    for (int i = 0; i < 500; ++i) {
        const auto method = i % 2 ? TreeMethod::grow : TreeMethod::full;
        const auto t = random_tree(method, uniform_int(rng, 1, method == TreeMethod::full ? 8 : 17),
                                   terminals_for(2), rng);
        const auto text = serialize(t);
        EXPECT_EQ(parse(text), t);
        EXPECT_EQ(serialize(parse(text)), text);
    }
}

TEST(Properties, SerializationIsInjective) {
    Rng rng(5);
    std::vector<ExprTree> trees;
    for (int i = 0; i < 300; ++i) trees.push_back(random_tree(TreeMethod::grow, 4, terminals_for(2), rng));
    for (const auto& a : trees)
        for (const auto& b : trees) EXPECT_EQ(a == b, serialize(a) == serialize(b));
}

TEST(Properties, EvaluationIsPure) {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto t = random_tree(TreeMethod::grow, 10, terminals_for(1), rng);
        const std::vector<double> p{uniform_real(rng, -3, 3)};
        const double a = eval_tree(t, p), b = eval_tree(t, p);
        EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
    }
}
