#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <random>
#include <string>

#include "texbleu/textnorm.hpp"

using texbleu::normalize_spacing;

TEST_CASE("whitespace runs collapse to one space") {
    CHECK(normalize_spacing("a  b").text == "a b");
    CHECK(normalize_spacing("a\tb").text == "a b");
    CHECK(normalize_spacing("a \r\n b").text == "a b");
    CHECK(normalize_spacing("  a b  ").text == "a b");
}

TEST_CASE("braces and commands get delimited") {
    CHECK(normalize_spacing("\\frac{a}{b}").text == "\\frac { a } { b }");
    CHECK(normalize_spacing("x^2+ y _i").text == "x ^ 2+ y _ i");
    CHECK(normalize_spacing("\\sqrt{b^2}").text == "\\sqrt { b ^ 2 }");
    CHECK(normalize_spacing("\\alpha\\beta").text == "\\alpha \\beta");
    CHECK(normalize_spacing("\\alpha1").text == "\\alpha 1");
}

TEST_CASE("empty and trivial inputs") {
    CHECK(normalize_spacing("").text == "");
    CHECK(normalize_spacing("   ").text == "");
    CHECK(normalize_spacing("x").text == "x");
    CHECK(normalize_spacing("").original_len == 0);
    CHECK(normalize_spacing("a  b").original_len == 4);
}

TEST_CASE("escaped single characters stay intact") {
    CHECK(normalize_spacing("50\\% off").text == "50 \\% off");
    CHECK(normalize_spacing("\\{a\\}").text == "\\{ a \\}");
    CHECK(normalize_spacing("\\\\x").text == "\\\\ x");
    // Backslash before whitespace or at the end stands alone.
    CHECK(normalize_spacing("a\\ b").text == "a \\ b");
    CHECK(normalize_spacing("a\\").text == "a \\");
    // Multi-byte escape is kept as one unit, not split mid-code-point.
    CHECK(normalize_spacing("\\\xC3\xA9x").text == "\\\xC3\xA9 x");
}

TEST_CASE("normalization is idempotent") {
    std::mt19937_64 rng(7);
    const std::string pool = "ab\\{}^_ \t\n\r%$12+=\xC3\xA9";
    for (int trial = 0; trial < 500; ++trial) {
        std::string raw;
        const std::size_t len = rng() % 40;
        for (std::size_t i = 0; i < len; ++i) raw += pool[rng() % pool.size()];
        const auto once = normalize_spacing(raw);
        const auto twice = normalize_spacing(once.text);
        CHECK(twice.text == once.text);
    }
}

TEST_CASE("normalized form satisfies its invariants") {
    std::mt19937_64 rng(11);
    const std::string pool = "xy\\{}^_ \t\nA9+";
    for (int trial = 0; trial < 500; ++trial) {
        std::string raw;
        const std::size_t len = rng() % 30;
        for (std::size_t i = 0; i < len; ++i) raw += pool[rng() % pool.size()];
        const auto norm = normalize_spacing(raw).text;
        CHECK(norm.find('\t') == std::string::npos);
        CHECK(norm.find('\n') == std::string::npos);
        CHECK(norm.find("  ") == std::string::npos);
        if (!norm.empty()) {
            CHECK(norm.front() != ' ');
            CHECK(norm.back() != ' ');
        }
    }
}

TEST_CASE("non-whitespace byte multiset is preserved") {
    std::mt19937_64 rng(13);
    const std::string pool = "qr\\{}^_ \t\n%8-";
    auto histogram = [](const std::string& s) {
        std::array<std::size_t, 256> h{};
        for (const char c : s) {
            if (c != ' ' && c != '\t' && c != '\n' && c != '\r') {
                h[static_cast<unsigned char>(c)] += 1;
            }
        }
        return h;
    };
    for (int trial = 0; trial < 500; ++trial) {
        std::string raw;
        const std::size_t len = rng() % 50;
        for (std::size_t i = 0; i < len; ++i) raw += pool[rng() % pool.size()];
        CHECK(histogram(raw) == histogram(normalize_spacing(raw).text));
    }
}

TEST_CASE("insensitive to whitespace already next to separators") {
    CHECK(normalize_spacing("a { b").text == normalize_spacing("a{b").text);
    CHECK(normalize_spacing("a \t{\n b").text == normalize_spacing("a{b").text);
    CHECK(normalize_spacing("\\frac {a}{b}").text ==
          normalize_spacing("\\frac{a}{b}").text);
    CHECK(normalize_spacing(" x ^ 2 ").text == normalize_spacing("x^2").text);
}
