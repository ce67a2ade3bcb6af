#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dpbound/catalog.hpp"

using namespace dpbound;

namespace {

double rel_err(double got, double want) {
    return std::abs(got - want) / std::abs(want);
}

const HeatingModel dp{ModelKind::DP};
const HeatingModel ccg{ModelKind::ClassicalChannel};

} // namespace

TEST_CASE("builtin catalog carries the four constraints") {
    Catalog c = Catalog::builtin();
    REQUIRE(c.records().size() == 4);

    const auto& lisa = c.find("lisa-pathfinder");
    const auto& direct = std::get<DirectLengthBound>(lisa.constraint);
    CHECK(direct.length.value() == 8.2e-14);
    CHECK(direct.model == ModelKind::DP);

    CHECK(std::get<SpecificPowerLimit>(c.find("neutron-stars").constraint)
              .power.value() == 1.0e-7);
    CHECK(std::get<SpecificPowerLimit>(c.find("neptune").constraint)
              .power.value() == 2.0e-11);
    const auto& cryo = c.find("cryostat-heatleak");
    CHECK(std::get<SpecificPowerLimit>(cryo.constraint).power.value() ==
          1.0e-11);
    CHECK(cryo.material == "copper");

    REQUIRE(c.annotations().size() == 1);
    CHECK(c.annotations()[0].find("x-ray") != std::string::npos);
    CHECK(c.annotations()[0].find("1e18 Hz") != std::string::npos);

    CHECK_THROWS_AS(c.find("nonexistent"), InputError);
}

TEST_CASE("derive_bound per record") {
    Catalog c = Catalog::builtin();
    SUBCASE("neptune under DP") {
        LengthBound b = derive_bound(c.find("neptune"), dp);
        CHECK(rel_err(b.length.value(), 3.6751267371858091e-12) < 1e-12);
        CHECK(rel_err(b.length.value(), 3.7e-12) < 0.03);
    }
    SUBCASE("lisa passes through directly") {
        LengthBound b = derive_bound(c.find("lisa-pathfinder"), dp);
        CHECK(b.length.value() == 8.2e-14);
        CHECK(b.source == c.find("lisa-pathfinder").provenance);
    }
    SUBCASE("cryostat under the classical channel") {
        LengthBound b = derive_bound(c.find("cryostat-heatleak"), ccg);
        CHECK(rel_err(b.length.value(), 8.8953005860715281e-12) < 1e-12);
        CHECK(rel_err(b.length.value(), 0.9e-11) < 0.03);
    }
    SUBCASE("direct bounds refuse a different model") {
        CHECK_THROWS_AS(derive_bound(c.find("lisa-pathfinder"), ccg),
                        ModelMismatchError);
    }
}

TEST_CASE("every builtin DP bound is within 3% of its quoted value") {
    Catalog c = Catalog::builtin();
    CHECK(rel_err(derive_bound(c.find("cryostat-heatleak"), dp).length
                      .value(),
                  4.6e-12) < 0.03);
    CHECK(rel_err(derive_bound(c.find("neptune"), dp).length.value(),
                  3.7e-12) < 0.03);
    // quoted at one significant figure as >= 1e-13 m
    CHECK(derive_bound(c.find("neutron-stars"), dp).length.value() > 1e-13);
    CHECK(derive_bound(c.find("lisa-pathfinder"), dp).length.value() ==
          8.2e-14);
}

TEST_CASE("rank_bounds orders by exclusion strength") {
    Catalog c = Catalog::builtin();
    SUBCASE("all four under DP") {
        auto ranked = rank_bounds(c.records(), dp);
        REQUIRE(ranked.size() == 4);
        CHECK(ranked[0].first == "cryostat-heatleak");
        CHECK(ranked[1].first == "neptune");
        CHECK(ranked[2].first == "neutron-stars");
        CHECK(ranked[3].first == "lisa-pathfinder");
    }
    SUBCASE("singleton") {
        auto ranked = rank_bounds({c.find("neptune")}, dp);
        REQUIRE(ranked.size() == 1);
        CHECK(ranked[0].first == "neptune");
    }
    SUBCASE("equal bounds break ties lexicographically") {
        ExperimentRecord a{"zeta",
                           SpecificPowerLimit{Quantity{
                               1e-11, Dimension::specific_power()}},
                           {}, "", ""};
        ExperimentRecord b{"alpha",
                           SpecificPowerLimit{Quantity{
                               1e-11, Dimension::specific_power()}},
                           {}, "", ""};
        auto ranked = rank_bounds({a, b}, dp);
        CHECK(ranked[0].first == "alpha");
        CHECK(ranked[1].first == "zeta");
    }
    SUBCASE("empty list is an input error") {
        CHECK_THROWS_AS(rank_bounds({}, dp), InputError);
    }
}

TEST_CASE("catalog serialization round-trips losslessly") {
    Catalog c = Catalog::builtin();
    std::ostringstream out;
    c.save(out);
    std::istringstream in(out.str());
    Catalog back = Catalog::load(in);
    CHECK(back == c);
}

TEST_CASE("shipped catalog file matches the builtin registry") {
    Catalog shipped =
        Catalog::load(std::filesystem::path(DPBOUND_DATA_DIR) /
                      "catalog.json");
    CHECK(shipped == Catalog::builtin());
}

TEST_CASE("catalog load rejects malformed input") {
    std::istringstream notjson("not json at all");
    CHECK_THROWS_AS(Catalog::load(notjson), ParseError);
    std::istringstream badtype(
        R"({"version":1,"records":[{"name":"x","type":"mystery"}]})");
    CHECK_THROWS_AS(Catalog::load(badtype), ParseError);
    std::istringstream negpower(
        R"({"version":1,"records":[{"name":"x","type":"specific-power-limit",
            "power_w_per_kg":-1.0}]})");
    CHECK_THROWS_AS(Catalog::load(negpower), ParseError);
    CHECK_THROWS_AS(Catalog::load(std::filesystem::path("/no/such/file")),
                    InputError);
}

TEST_CASE("exclusion dataset") {
    Catalog c = Catalog::builtin();
    std::vector<ExperimentRecord> cryo{c.find("cryostat-heatleak")};
    Quantity urms{4.3001297671961765e-12, Dimension::length()};
    auto range = std::pair{Quantity{1e-12, Dimension::length()},
                           Quantity{1e-11, Dimension::length()}};

    SUBCASE("curve crosses the 10 pW/kg line at the inverted bound") {
        ExclusionDataset ds = exclusion_dataset(
            dp, cryo, {{"u_rms", urms}}, range, 100);
        REQUIRE(ds.model_curve.size() == 100);
        REQUIRE(ds.limit_lines.size() == 1);
        CHECK(ds.limit_lines[0].label == "cryostat-heatleak");
        REQUIRE(ds.marker_lines.size() == 1);
        auto crossing = ds.crossing_length(1e-11);
        REQUIRE(crossing.has_value());
        // within one sampling step of the closed-form inversion
        double step = std::pow(10.0, 1.0 / 99.0);
        CHECK(*crossing / 4.6303695372118643e-12 < step);
        CHECK(4.6303695372118643e-12 / *crossing < step);
    }

    SUBCASE("curve is strictly decreasing and within range") {
        ExclusionDataset ds = exclusion_dataset(dp, cryo, {}, range, 64);
        for (std::size_t i = 0; i + 1 < ds.model_curve.size(); ++i) {
            CHECK(ds.model_curve[i].second > ds.model_curve[i + 1].second);
            CHECK(ds.model_curve[i].first >= ds.length_range.first);
            CHECK(ds.model_curve[i].first <= ds.length_range.second);
        }
    }

    SUBCASE("curve value at the copper nuclear spread") {
        ExclusionDataset ds = exclusion_dataset(dp, cryo, {}, range, 1000);
        // nearest sample to 4.3e-12 m must sit on the heating law
        double want_l = 4.3e-12;
        double best_l = 0, best_p = 0, best_d = 1e300;
        for (auto [l, p] : ds.model_curve) {
            double d = std::abs(std::log(l / want_l));
            if (d < best_d) {
                best_d = d;
                best_l = l;
                best_p = p;
            }
        }
        double expect = 1.2486524971840047e-11 *
                        std::pow(want_l / best_l, 3.0);
        CHECK(rel_err(best_p, expect) < 1e-12);
    }

    SUBCASE("two points only, still monotone") {
        ExclusionDataset ds = exclusion_dataset(dp, cryo, {}, range, 2);
        REQUIRE(ds.model_curve.size() == 2);
        CHECK(ds.model_curve[0].first == doctest::Approx(1e-12));
        CHECK(ds.model_curve[1].first == doctest::Approx(1e-11));
        CHECK(ds.model_curve[0].second > ds.model_curve[1].second);
    }

    SUBCASE("input validation") {
        CHECK_THROWS_AS(exclusion_dataset(dp, cryo, {}, range, 1),
                        InputError);
        auto inverted = std::pair{range.second, range.first};
        CHECK_THROWS_AS(exclusion_dataset(dp, cryo, {}, inverted, 10),
                        InputError);
    }
}

TEST_CASE("csv export carries one section per element") {
    Catalog c = Catalog::builtin();
    std::vector<ExperimentRecord> cryo{c.find("cryostat-heatleak")};
    Quantity urms{4.3001297671961765e-12, Dimension::length()};
    ExclusionDataset ds = exclusion_dataset(
        dp, cryo, {{"u_rms", urms}},
        {Quantity{1e-12, Dimension::length()},
         Quantity{1e-11, Dimension::length()}},
        10);
    std::ostringstream out;
    write_dataset_csv(ds, out);
    std::string text = out.str();
    CHECK(text.find("# section: model-curve") != std::string::npos);
    CHECK(text.find("# section: limit cryostat-heatleak") !=
          std::string::npos);
    CHECK(text.find("# section: marker u_rms") != std::string::npos);

    // data rows parse back to the dataset values
    std::istringstream in(text);
    std::string line;
    std::size_t curve_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.find(',') != std::string::npos) ++curve_rows;
    }
    CHECK(curve_rows == 10);
}

namespace {

// Minimal XML well-formedness scan: balanced tags and, within each element,
// unique attribute names.
void check_xml_wellformed(const std::string& doc) {
    std::vector<std::string> stack;
    std::size_t pos = 0;
    while ((pos = doc.find('<', pos)) != std::string::npos) {
        std::size_t end = doc.find('>', pos);
        REQUIRE(end != std::string::npos);
        std::string element = doc.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (element.empty() || element[0] == '?' || element[0] == '!')
            continue;
        if (element[0] == '/') {
            REQUIRE_FALSE(stack.empty());
            CHECK(stack.back() == element.substr(1));
            stack.pop_back();
            continue;
        }
        bool self_closing = element.back() == '/';
        if (self_closing) element.pop_back();
        auto space = element.find_first_of(" \t\n");
        std::string name =
            space == std::string::npos ? element : element.substr(0, space);
        if (!self_closing) stack.push_back(name);

        std::vector<std::string> attrs;
        std::size_t apos = space;
        while (apos != std::string::npos && apos < element.size()) {
            auto eq = element.find('=', apos);
            if (eq == std::string::npos) break;
            std::string attr = element.substr(apos, eq - apos);
            attr.erase(0, attr.find_first_not_of(" \t\n"));
            attr.erase(attr.find_last_not_of(" \t\n") + 1);
            for (const auto& seen : attrs)
                CHECK_MESSAGE(seen != attr, "duplicate attribute ", attr,
                              " in <", name, ">");
            attrs.push_back(attr);
            auto quote = element.find('"', eq);
            REQUIRE(quote != std::string::npos);
            auto close = element.find('"', quote + 1);
            REQUIRE(close != std::string::npos);
            apos = close + 1;
        }
    }
    CHECK(stack.empty());
}

} // namespace

TEST_CASE("svg export is a well-formed document") {
    Catalog c = Catalog::builtin();
    ExclusionDataset ds = exclusion_dataset(
        dp, c.records(), {{"u_rms", Quantity{4.3e-12, Dimension::length()}}},
        {Quantity{1e-13, Dimension::length()},
         Quantity{1e-11, Dimension::length()}},
        50);
    std::ostringstream out;
    write_dataset_svg(ds, out);
    std::string svg = out.str();
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("u_rms") != std::string::npos);
    check_xml_wellformed(svg);
}
