#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "resave/error.hpp"
#include "resave/ingestion.hpp"

using namespace resave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "resave_unit";
    fs::create_directories(dir);
    return dir / name;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = scratch(name);
    std::ofstream(p, std::ios::binary) << text;
    return p;
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::numerical_failure;
}

const std::string standin = std::string(RESAVE_TEST_DATA_DIR) + "/diabetes_standin.csv";

}  // namespace

TEST_SUITE("ingestion") {

TEST_CASE("three-line file") {
    const auto p = write_file("three.csv", "y,a,b\n1,2,3\n4,5,6\n");
    const Dataset d = load_csv(p.string(), std::string("y"));
    CHECK(d.size() == 2);
    CHECK(d.dim() == 2);
    CHECK(d.column_names == std::vector<std::string>{"y", "a", "b"});
    const Observation o = d.observation(1);
    CHECK(o.y == 4.0);
    CHECK(o.x == Vector{5.0, 6.0});
    CHECK(d.skipped_lines.empty());
}

TEST_CASE("NA and malformed rows are skipped with their line numbers") {
    const Dataset d = parse_csv("y,a,b\n1,2,3\n4,NA,6\n7,8\n,1,2\n1,x,2\n9,10,11\n", std::string("y"));
    CHECK(d.size() == 2);
    CHECK(d.skipped_lines == std::vector<std::size_t>{3, 4, 5, 6});
    CHECK(d.observation(1).y == 9.0);
}

TEST_CASE("unselected cells are not inspected") {
    const Dataset d = parse_csv("y,a,junk\n1,2,NA\n", std::string("y"), {std::string("a")});
    CHECK(d.size() == 1);
    CHECK(d.column_names == std::vector<std::string>{"y", "a"});
}

TEST_CASE("selection by name equals selection by index") {
    const std::string text = "a,b,y,c\n1,2,3,4\n5,6,7,8\n9,1,2,3\n";
    const Dataset by_name = parse_csv(text, std::string("y"), {std::string("c"), std::string("a")});
    const Dataset by_index = parse_csv(text, std::size_t{2}, {std::size_t{3}, std::size_t{0}});
    const Dataset by_digit = parse_csv(text, std::string("2"), {std::string("3"), std::string("0")});
    for (const Dataset* d : {&by_index, &by_digit}) {
        CHECK(d->observations().size() == by_name.size());
        for (std::size_t i = 0; i < by_name.size(); ++i) {
            CHECK(d->observation(i).y == by_name.observation(i).y);
            CHECK(d->observation(i).x == by_name.observation(i).x);
        }
    }
    CHECK(by_name.observation(0).x == Vector{4.0, 1.0});
}

TEST_CASE("a header name wins over its numeric reading") {
    const Dataset d = parse_csv("1,0\n5,6\n", std::string("0"));
    CHECK(d.observation(0).y == 6.0);
}

TEST_CASE("quoting, CRLF, BOM and blank lines") {
    const Dataset d =
        parse_csv("\xEF\xBB\xBF\"y\", \"a,b\"\r\n\"1.5\", 2e-1\r\n\r\n -3 ,+4\r\n", std::string("y"));
    CHECK(d.column_names == std::vector<std::string>{"y", "a,b"});
    CHECK(d.size() == 2);
    CHECK(d.observation(0).x[0] == 0.2);
    CHECK(d.observation(1).y == -3.0);
    CHECK(split_csv_line("\"he said \"\"hi\"\"\",x") == std::vector<std::string>{"he said \"hi\"", "x"});
}

TEST_CASE("parse_cell") {
    CHECK(*parse_cell(" 1.25 ") == 1.25);
    CHECK_FALSE(parse_cell("NA").has_value());
    CHECK_FALSE(parse_cell("").has_value());
    CHECK_FALSE(parse_cell("inf").has_value());
    CHECK_FALSE(parse_cell("nan").has_value());
    CHECK_FALSE(parse_cell("1.2.3").has_value());
}

TEST_CASE("errors") {
    CHECK(code_of([] { load_csv(scratch("missing.csv").string(), std::string("y")); }) == ErrorCode::io_error);
    CHECK(code_of([] { parse_csv("y,a\n1,2\n", std::string("z")); }) == ErrorCode::schema_error);
    CHECK(code_of([] { parse_csv("y,a\n1,2\n", std::string("y"), {std::string("y")}); }) ==
          ErrorCode::schema_error);
    CHECK(code_of([] { parse_csv("y,a\n1,2\n", std::string("y"), {std::string("a"), std::size_t{1}}); }) ==
          ErrorCode::schema_error);
    CHECK(code_of([] { parse_csv("y,a\n1,2\n", std::size_t{7}); }) == ErrorCode::schema_error);
    CHECK(code_of([] { parse_csv("", std::string("y")); }) == ErrorCode::schema_error);
    CHECK(code_of([] { parse_csv("y,a\nNA,2\n", std::string("y")); }) == ErrorCode::empty_dataset);
    CHECK(code_of([] { parse_csv("y\n1\n", std::string("y")); }) == ErrorCode::schema_error);
}

TEST_CASE("gzip input") {
    const std::string text = "y,a,b\n1,2,3\n4,5,6\n7,8,9\n";
    const fs::path p = scratch("small.csv.gz");
    gzFile f = gzopen(p.string().c_str(), "wb");
    REQUIRE(f != nullptr);
    gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
    gzclose(f);
    const Dataset d = load_csv(p.string(), std::string("y"));
    CHECK(d.size() == 3);
    CHECK(d.observation(2).x == Vector{8.0, 9.0});
    CHECK(read_text_file(p.string()) == text);
}

TEST_CASE("loading is idempotent") {
    const Dataset a = load_csv(standin, std::string("Glucose"));
    const Dataset b = load_csv(standin, std::string("Glucose"));
    CHECK(a.rows == b.rows);
    CHECK(a.size() == 1988);
    CHECK(a.skipped_lines.size() == 12);
    CHECK(a.dim() == 6);
}

TEST_CASE("row order") {
    CHECK(row_order(4, std::nullopt) == std::vector<std::size_t>{0, 1, 2, 3});
    const auto a = row_order(50, 3), b = row_order(50, 3);
    CHECK(a == b);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == row_order(50, std::nullopt));
    CHECK(a != sorted);
}

TEST_CASE("holdout boundaries and self reference") {
    const Dataset d = load_csv(standin, std::string("Glucose"));
    HoldoutConfig c;
    c.p = d.size() - c.n0;
    CHECK(code_of([&] { holdout_eval(d, c); }) == ErrorCode::insufficient_data);

    c.p = 50;
    const HoldoutReport first = holdout_eval(d, c);
    CHECK(first.evaluated + first.skipped == d.size() - 150);
    c.reference = first.beta_hat;
    const HoldoutReport self = holdout_eval(d, c);
    CHECK(self.r2_mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(self.r2_std < 1e-12);

    c.reference = Vector{1.0, 2.0};
    CHECK(code_of([&] { holdout_eval(d, c); }) == ErrorCode::invalid_argument);
}

TEST_CASE("holdout is deterministic") {
    const Dataset d = load_csv(standin, std::string("Glucose"));
    HoldoutConfig c;
    c.p = 100;
    c.shuffle_seed = 5;
    const HoldoutReport a = holdout_eval(d, c);
    const HoldoutReport b = holdout_eval(d, c);
    CHECK(a.r2_mean == b.r2_mean);
    CHECK(a.beta_hat == b.beta_hat);
}

TEST_CASE("stand-in data: Save-R and Save-NR agree at p = 400") {
    const Dataset d = load_csv(standin, std::string("Glucose"));
    HoldoutConfig c;
    c.p = 400;
    c.estimator = Estimator::save_r;
    const HoldoutReport r = holdout_eval(d, c);
    c.estimator = Estimator::save_nr;
    const HoldoutReport nr = holdout_eval(d, c);
    MESSAGE("save-r " << r.r2_mean << ", save-nr " << nr.r2_mean);
    CHECK(std::abs(r.r2_mean - nr.r2_mean) < 0.01);
    CHECK(r.reference == nr.reference);
}

}
