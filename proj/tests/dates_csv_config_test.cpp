#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "mobipred/config.hpp"
#include "mobipred/csv.hpp"
#include "mobipred/dates.hpp"

using namespace mobipred;

TEST_CASE("floor division is exact for negative numerators") {
    CHECK(floor_div(7, 2) == 3);
    CHECK(floor_div(-7, 2) == -4);
    CHECK(floor_div(-6, 2) == -3);
    CHECK(floor_div(-1, 86400) == -1);
    CHECK(floor_mod(-1, 86400) == 86399);
    CHECK(floor_mod(-86400, 86400) == 0);
    CHECK(floor_mod(5, 7) == 5);
}

TEST_CASE("civil date conversion round-trips across centuries and leap days") {
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(1969, 12, 31) == -1);
    CHECK(days_from_civil(2000, 3, 1) == 11017);
    CHECK(days_from_civil(2022, 3, 7) == 19058);

    int y, m, d;
    civil_from_days(days_from_civil(2020, 2, 29), y, m, d);
    CHECK(y == 2020);
    CHECK(m == 2);
    CHECK(d == 29);

    for (EpochDay day = -800; day <= 30000; day += 37) {
        civil_from_days(day, y, m, d);
        CHECK(days_from_civil(y, m, d) == day);
    }
}

TEST_CASE("iso date parsing is strict") {
    CHECK(parse_iso_date("2022-03-07") == days_from_civil(2022, 3, 7));
    CHECK(format_iso_date(*parse_iso_date("1999-12-31")) == "1999-12-31");
    CHECK(!parse_iso_date("2022-3-7"));
    CHECK(!parse_iso_date("2022/03/07"));
    CHECK(!parse_iso_date("2022-13-01"));
    CHECK(!parse_iso_date("2022-02-30"));
    CHECK(!parse_iso_date("2022-03-07T00:00"));
    CHECK(!parse_iso_date(""));
}

TEST_CASE("utc offset parser accepts the documented spellings") {
    CHECK(parse_utc_offset_seconds("UTC") == 0);
    CHECK(parse_utc_offset_seconds("UTC+05:30") == 5 * 3600 + 30 * 60);
    CHECK(parse_utc_offset_seconds("UTC-06:00") == -6 * 3600);
    CHECK(parse_utc_offset_seconds("+02:00") == 2 * 3600);
    CHECK(parse_utc_offset_seconds("-0430") == -(4 * 3600 + 30 * 60));
    CHECK(parse_utc_offset_seconds("-5") == -5 * 3600);
    CHECK(parse_utc_offset_seconds("0") == 0);
    CHECK(!parse_utc_offset_seconds("PST"));
    CHECK(!parse_utc_offset_seconds("UTC+25:00"));
    CHECK(!parse_utc_offset_seconds(""));

    CHECK(parse_utc_offset_seconds(format_utc_offset(-21600)) == -21600);
    CHECK(parse_utc_offset_seconds(format_utc_offset(19800)) == 19800);
}

TEST_CASE("local day and minute respect the fixed offset") {
    // 2022-03-07 00:30 UTC is still 2022-03-06 local at UTC-6.
    EpochSeconds t = static_cast<EpochSeconds>(days_from_civil(2022, 3, 7)) * kSecondsPerDay + 1800;
    CHECK(local_day(t, 0) == days_from_civil(2022, 3, 7));
    CHECK(local_day(t, -21600) == days_from_civil(2022, 3, 6));
    CHECK(local_minute_of_day(t, 0) == 30);
    CHECK(local_minute_of_day(t, -21600) == 18 * 60 + 30);

    CHECK(day_of_week(days_from_civil(2022, 3, 7)) == 0);  // Monday
    CHECK(day_of_week(days_from_civil(2022, 3, 13)) == 6);
    CHECK(!is_weekend(days_from_civil(2022, 3, 11)));
    CHECK(is_weekend(days_from_civil(2022, 3, 12)));
    CHECK(is_weekend(days_from_civil(2022, 3, 13)));
}

TEST_CASE("csv reader keeps source line numbers and empty fields") {
    auto dir = std::filesystem::temp_directory_path() / "mobipred_csv_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "t.csv").string();
    {
        std::ofstream out(path);
        out << "a,b,c\n1,2,3\n\n4,,6\n";
    }
    CsvFile f = read_csv(path);
    REQUIRE(f.header.size() == 3);
    REQUIRE(f.rows.size() == 2);
    CHECK(f.rows[0] == std::vector<std::string>{"1", "2", "3"});
    CHECK(f.rows[1] == std::vector<std::string>{"4", "", "6"});
    CHECK(f.line_numbers[0] == 2);
    CHECK(f.line_numbers[1] == 4);

    CHECK(split_csv_line("x,,y").size() == 3);
    CHECK(split_csv_line("") == std::vector<std::string>{""});
    CHECK_THROWS(read_csv((dir / "missing.csv").string()));
}

TEST_CASE("double formatting round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 41.8781, 6371.0088, 0.0, 1e308}) {
        double back;
        REQUIRE(parse_double(format_double(v), back));
        CHECK(back == v);
    }
    CHECK(format_double(2.0) == "2");

    double d;
    CHECK(parse_double("-1.5e3", d));
    CHECK(d == -1500.0);
    CHECK(!parse_double("1.5x", d));
    CHECK(!parse_double("", d));
    CHECK(!parse_double("nanandmore", d));

    std::int64_t i;
    CHECK(parse_int64("-42", i));
    CHECK(i == -42);
    CHECK(!parse_int64("12.5", i));
    CHECK(!parse_int64("12a", i));
    CHECK(!parse_int64("", i));
}

TEST_CASE("config parses key=value with comments and typed getters") {
    Config c = Config::from_string(
        "# header comment\n"
        "learn.c_exponents = 0,5  \n"
        "eval.seed=17\n"
        "adapt.lambda = 1.5\n"
        "eval.macro_f1 = true\n"
        "name = cohort a\n");
    CHECK(c.has("eval.seed"));
    CHECK(!c.has("missing"));
    CHECK(c.get_int("eval.seed", -1) == 17);
    CHECK(c.get_double("adapt.lambda", 0.0) == 1.5);
    CHECK(c.get_bool("eval.macro_f1", false));
    CHECK(c.get_string("name", "") == "cohort a");
    CHECK(c.get_int("absent", 9) == 9);
    auto list = c.get_list("learn.c_exponents");
    REQUIRE(list.size() == 2);
    CHECK(list[0] == "0");
    CHECK(list[1] == "5");
    CHECK(c.get_list("absent").empty());
}

TEST_CASE("environment variables override file values") {
    Config c = Config::from_string("learn.c_exp_step=2\nkeep.me=1\n");
    ::setenv("MOBIPRED_LEARN_C_EXP_STEP", "5", 1);
    ::setenv("MOBIPRED_COVERAGE_MIN_DAYS", "9", 1);
    c.apply_env_overrides();
    CHECK(c.get_int("learn.c_exp_step", 0) == 5);
    CHECK(c.get_int("keep.me", 0) == 1);
    // Keys absent from the file resolve through the environment too, so
    // defaults applied downstream of the config stay overridable.
    CHECK(c.has("coverage.min_days"));
    CHECK(c.get_int("coverage.min_days", 5) == 9);
    ::unsetenv("MOBIPRED_LEARN_C_EXP_STEP");
    ::unsetenv("MOBIPRED_COVERAGE_MIN_DAYS");
    CHECK(c.get_int("learn.c_exp_step", 0) == 5);  // copied at apply time
    CHECK(c.get_int("coverage.min_days", 5) == 5);

    Config plain = Config::from_string("a.b=1\n");
    ::setenv("MOBIPRED_A_B", "2", 1);
    CHECK(plain.get_int("a.b", 0) == 1);  // no apply_env_overrides, env ignored
    ::unsetenv("MOBIPRED_A_B");
}
