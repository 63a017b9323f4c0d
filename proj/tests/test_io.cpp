#include "binfilt/generators.hpp"
#include "binfilt/io.hpp"
#include "binfilt/polyspace.hpp"
#include "binfilt/util.hpp"

#include "doctest.h"

#include <cstdio>

using namespace binfilt;

TEST_SUITE("io") {

TEST_CASE("rational helpers") {
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(rational_to_string(Rational(3, 4)) == "3/4");
    CHECK(rational_to_string(Rational(5)) == "5");
    CHECK(fits_double(Rational(1, 4)));
    CHECK(!fits_double(Rational(1, 3)));
    CHECK(*exact_sqrt(Rational(9, 16)) == Rational(3, 4));
    CHECK(!exact_sqrt(Rational(1, 3)).has_value());
    CHECK(log2_rational(pow_rational(Rational(1, 2), 3000)) == doctest::Approx(-3000.0));
}

TEST_CASE("csv and double formatting") {
    CHECK(fmt_double(0.25) == "0.25");
    CHECK(fmt_double(1.0 / 3.0) == "0.3333333333333333");
    std::string csv = to_csv({"a", "b"}, {{"1", "2"}, {"3", "4"}});
    CHECK(csv == "a,b\n1,2\n3,4\n");
}

TEST_CASE("filtration files round trip on disk") {
    Filtration f = random_filtration(42, 2, 12, 6);
    std::string path = "/tmp/binfilt_test_filtration.json";
    save_filtration(path, f);
    Filtration g = load_filtration(path);
    CHECK(g.to_json() == f.to_json());
    std::remove(path.c_str());
}

TEST_CASE("poly serialization") {
    Rect I = Rect::from_doubles({0.25, 0.0}, {1.0, 0.5});
    Poly q(I, {1, 2}, {1, 2, 3, 4, 5, 6});
    nlohmann::json j = q.to_json();
    CHECK(j.contains("bernstein_coeffs"));
    Poly back = Poly::from_json(j);
    CHECK(back.eval({0.5, 0.25}) == doctest::Approx(q.eval({0.5, 0.25})).epsilon(1e-14));
}

TEST_CASE("svg chart emits standalone markup") {
    PlotSeries s;
    s.label = "errors";
    s.points = {{1, 1.0}, {2, 0.5}, {4, 0.25}};
    std::string svg = svg_line_chart("test", {s}, true, true);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("config hash stability") {
    nlohmann::json a = {{"p", 2.0}, {"tau", 1.0}};
    nlohmann::json b = {{"tau", 1.0}, {"p", 2.0}};
    CHECK(json_hash(a) == json_hash(b));  // object keys are sorted on dump
    nlohmann::json c = {{"p", 2.0}, {"tau", 1.5}};
    CHECK(json_hash(a) != json_hash(c));
}

}  // TEST_SUITE
