#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pcgrow/circuit.hpp"
#include "pcgrow/io.hpp"
#include "pcgrow/rng.hpp"
#include "support.hpp"

using namespace pcg;

namespace {

Circuit two_leaf_product(int var_a, int var_b) {
    Circuit c;
    c.num_vars = 4;
    c.domains.assign(4, 2);
    Unit la{UnitKind::Input, var_a, {}, {}, {0.5, 0.5}};
    Unit lb{UnitKind::Input, var_b, {}, {}, {0.25, 0.75}};
    c.units.push_back(la);
    c.units.push_back(lb);
    Unit prod;
    prod.kind = UnitKind::Product;
    prod.children = {0, 1};
    c.units.push_back(prod);
    Unit root;
    root.kind = UnitKind::Sum;
    root.children = {2};
    root.weights = {1.0};
    c.units.push_back(root);
    c.roots = {3};
    return c;
}

}  // namespace

TEST_CASE("product over two leaves on the same variable is not decomposable") {
    Circuit c = two_leaf_product(3, 3);
    StructureReport rep = validate_structure(c);
    CHECK_FALSE(rep.decomposable);
    CHECK(std::find(rep.offending.begin(), rep.offending.end(), 2) != rep.offending.end());
}

TEST_CASE("sum over leaves with different scopes is not smooth") {
    Circuit c;
    c.num_vars = 3;
    c.domains.assign(3, 2);
    Unit l1{UnitKind::Input, 1, {}, {}, {0.5, 0.5}};
    Unit l2{UnitKind::Input, 2, {}, {}, {0.5, 0.5}};
    c.units.push_back(l1);
    c.units.push_back(l2);
    Unit sum;
    sum.kind = UnitKind::Sum;
    sum.children = {0, 1};
    sum.weights = {0.5, 0.5};
    c.units.push_back(sum);
    c.roots = {2};
    StructureReport rep = validate_structure(c);
    CHECK_FALSE(rep.smooth);
    CHECK_FALSE(rep.alternating);  // leaves directly under a sum
}

TEST_CASE("well-formed circuit with valid parameters passes all checks") {
    Circuit c = two_leaf_product(0, 1);
    CHECK_NOTHROW(check_well_formed(c));
    StructureReport rep = validate_structure(c);
    CHECK(rep.smooth);
    CHECK(rep.decomposable);
    CHECK(rep.alternating);
    CHECK(rep.offending.empty());
}

TEST_CASE("random circuits round-trip through the text format bit-exact") {
    Rng rng(20240913);
    Circuit c = testsupport::random_circuit(rng, 10, 2, 3);
    while (c.num_units() < 1000) {
        Circuit bigger = testsupport::random_circuit(rng, 10, 2, 3);
        if (bigger.num_units() > c.num_units()) c = std::move(bigger);
    }

    std::ostringstream out;
    write_circuit(out, c);
    std::istringstream in(out.str());
    Circuit back = read_circuit(in);

    REQUIRE(back.num_units() == c.num_units());
    CHECK(back.num_vars == c.num_vars);
    CHECK(back.domains == c.domains);
    CHECK(back.roots == c.roots);
    for (int u = 0; u < c.num_units(); ++u) {
        CHECK(back.units[u].kind == c.units[u].kind);
        CHECK(back.units[u].var == c.units[u].var);
        CHECK(back.units[u].children == c.units[u].children);
        // bit-exact parameters
        CHECK(back.units[u].weights == c.units[u].weights);
        CHECK(back.units[u].table == c.units[u].table);
    }

    std::ostringstream again;
    write_circuit(again, back);
    CHECK(again.str() == out.str());
}

TEST_CASE("circuit with no roots fails to parse") {
    std::istringstream in(
        "PC v1 1 0\n"
        "2\n"
        "0 I 0 0.5 0.5\n"
        "ROOTS\n");
    CHECK_THROWS_AS(read_circuit(in), ParseError);
}

TEST_CASE("sum whose weights sum to 0.9 fails to parse naming the unit") {
    std::istringstream in(
        "PC v1 1 1\n"
        "2\n"
        "0 I 0 0.5 0.5\n"
        "1 P 0\n"
        "2 S 1:0.9\n"
        "ROOTS 2\n");
    try {
        read_circuit(in);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("unit 2") != std::string::npos);
        CHECK(e.line() == 5);
    }
}

TEST_CASE("forward references and bad ids are parse errors") {
    std::istringstream fwd(
        "PC v1 1 1\n"
        "2\n"
        "0 S 1:1\n"
        "1 P 0\n"
        "ROOTS 0\n");
    CHECK_THROWS_AS(read_circuit(fwd), ParseError);

    std::istringstream bad_id(
        "PC v1 1 1\n"
        "2\n"
        "7 I 0 0.5 0.5\n"
        "ROOTS 7\n");
    CHECK_THROWS_AS(read_circuit(bad_id), ParseError);
}

TEST_CASE("leaf table must match the variable domain") {
    std::istringstream in(
        "PC v1 1 3\n"
        "3\n"
        "0 I 0 0.5 0.5\n"
        "ROOTS 0\n");
    CHECK_THROWS_AS(read_circuit(in), ParseError);
}

TEST_CASE("randomize_parameters keeps normalization") {
    Rng rng(7);
    Circuit c = testsupport::random_circuit(rng, 6);
    randomize_parameters(c, rng);
    CHECK_NOTHROW(check_well_formed(c));
}
