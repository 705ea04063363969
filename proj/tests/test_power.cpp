#include "phtwin/errors.hpp"
#include "phtwin/power.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace phtwin;

TEST_CASE("reference budget totals")
{
    const auto t = power_totals(reference_budget());
    // 1090 + 49 + 396 + 7350 + 6930 uW = 15815 uW, half-up to 15.82
    CHECK(t.total_mw == doctest::Approx(15.82));
    CHECK(t.total_without_optional_mw == doctest::Approx(8.89));
    CHECK(t.intraoral_mw == doctest::Approx(1.54));
}

TEST_CASE("reference budget lists the five parts")
{
    const auto b = reference_budget();
    REQUIRE(b.entries.size() == 5);
    int optional = 0, intraoral = 0;
    for (const auto& e : b.entries) {
        optional += e.optional;
        intraoral += e.intraoral;
    }
    CHECK(optional == 1);
    CHECK(intraoral == 3);
}

TEST_CASE("totals round half up at the 10 uW digit")
{
    PowerBudget b{{{"a", "", 0.005, false, false}}};
    CHECK(power_totals(b).total_mw == doctest::Approx(0.01));
    // 4.4 uW rounds to 4 uW first, then down
    b.entries[0].power_mw = 0.0044;
    CHECK(power_totals(b).total_mw == doctest::Approx(0.0));
    CHECK(power_totals(PowerBudget{}).total_mw == 0.0);
}

TEST_CASE("negative power is rejected")
{
    PowerBudget b{{{"a", "", -1.0, false, false}}};
    CHECK_THROWS_AS(power_totals(b), ValidationError);
}

TEST_CASE("budget file parses to the reference budget")
{
    std::ifstream in(PHTWIN_POWER_FILE);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto b = parse_power_budget(ss.str());
    const auto ref = reference_budget();
    REQUIRE(b.entries.size() == ref.entries.size());
    for (std::size_t i = 0; i < b.entries.size(); ++i) {
        CHECK(b.entries[i].component == ref.entries[i].component);
        CHECK(b.entries[i].part == ref.entries[i].part);
        CHECK(b.entries[i].power_mw == doctest::Approx(ref.entries[i].power_mw));
        CHECK(b.entries[i].intraoral == ref.entries[i].intraoral);
        CHECK(b.entries[i].optional == ref.entries[i].optional);
    }
    const auto t = power_totals(b);
    CHECK(t.total_mw == doctest::Approx(15.82));
    CHECK(t.total_without_optional_mw == doctest::Approx(8.89));
}

TEST_CASE("budget parser errors")
{
    CHECK_THROWS_AS(parse_power_budget("name = \"x\"\n"), ValidationError);
    CHECK_THROWS_AS(parse_power_budget("[[component]]\nname = \"x\"\n"), ValidationError);
    CHECK_THROWS_AS(parse_power_budget("[[component]]\nname = \"x\"\npower_mw = abc\n"), ValidationError);
    CHECK_THROWS_AS(parse_power_budget("[[component]]\nname = \"x\"\npower_mw = 1\noptional = maybe\n"),
                    ValidationError);
    CHECK_THROWS_AS(parse_power_budget("[other]\n"), ValidationError);
    CHECK_THROWS_AS(parse_power_budget("[[component]]\nname = \"x\"\npower_mw = -2\n"), ValidationError);
    CHECK(parse_power_budget("# nothing\n").entries.empty());
}
