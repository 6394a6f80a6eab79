#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "helpers.hpp"
#include "nsmax/errors.hpp"
#include "nsmax/io.hpp"

using namespace nsmax;

TEST_CASE("project_coordinates matches the equirectangular formulas") {
    const io::LonLat ref{10.0, 50.0};
    const std::vector<io::LonLat> pts{{10.0, 50.0}, {10.0, 51.0}, {11.0, 50.0}};
    const auto xy = io::project_coordinates(pts, ref);
    CHECK(xy[0][0] == 0.0);
    CHECK(xy[0][1] == 0.0);
    const double per_deg = 6371.0 * std::numbers::pi / 180.0;
    CHECK(xy[1][0] == doctest::Approx(0.0));
    CHECK(xy[1][1] == doctest::Approx(per_deg).epsilon(1e-12));
    CHECK(xy[1][1] == doctest::Approx(111.19).epsilon(1e-4));
    CHECK(xy[2][0] == doctest::Approx(per_deg * std::cos(50.0 * std::numbers::pi / 180.0)).epsilon(1e-12));
    CHECK(xy[2][0] == doctest::Approx(71.47).epsilon(1e-4));
}

TEST_CASE("projection rejects pole-adjacent references and bad latitudes") {
    const std::vector<io::LonLat> pts{{0.0, 10.0}};
    CHECK_THROWS_AS(io::project_coordinates(pts, {0.0, 89.5}), ProjectionError);
    const std::vector<io::LonLat> bad{{0.0, 90.0}};
    CHECK_THROWS_AS(io::project_coordinates(bad, {0.0, 45.0}), ProjectionError);
}

TEST_CASE("projected distances are exactly symmetric") {
    Engine rng(3);
    std::uniform_real_distribution<double> lon(5.0, 15.0), lat(47.0, 55.0);
    std::vector<io::LonLat> pts;
    for (int i = 0; i < 50; ++i) pts.push_back({lon(rng), lat(rng)});
    const auto xy = io::project_coordinates(pts, {10.0, 51.0});
    for (std::size_t a = 0; a < xy.size(); ++a)
        for (std::size_t b = 0; b < xy.size(); ++b) {
            const double dab = std::hypot(xy[a][0] - xy[b][0], xy[a][1] - xy[b][1]);
            const double dba = std::hypot(xy[b][0] - xy[a][0], xy[b][1] - xy[a][1]);
            CHECK(dab == dba);
        }
}

namespace {
const char* kMeta = "site_id,lon,lat,alt_m\n3,10.0,50.0,100\n1,10.5,50.2,250\n2,9.8,50.4,1200\n";
}

TEST_CASE("load_panel reads a well-formed 3-site 2-year file") {
    const auto meta = testing::temp_file("meta.csv", kMeta);
    const auto panel = testing::temp_file("panel.csv", "year,3,1,2\n2001,1.5,2.5,3.5\n2000,4,5,6\n");
    auto [sites, p] = io::load_panel(panel, meta);
    CHECK(p.n_blocks() == 2);
    CHECK(p.n_sites() == 3);
    CHECK(p.state() == MarginState::Raw);
    // rows sorted by year, columns by numeric site id
    CHECK(p.years() == std::vector<long>{2000, 2001});
    CHECK(sites.ids() == std::vector<std::string>{"1", "2", "3"});
    CHECK(p.value(0, 0) == 5.0);
    CHECK(p.value(1, 2) == 1.5);
    CHECK(sites.covariate(1)[0] == doctest::Approx(1.2));
}

TEST_CASE("load_panel flags NA cells in the missing mask") {
    const auto meta = testing::temp_file("meta_na.csv", kMeta);
    const auto panel = testing::temp_file("panel_na.csv", "year,1,2,3\n2000,1,NA,3\n2001,4,5,6\n");
    auto [sites, p] = io::load_panel(panel, meta);
    CHECK(p.missing(0, 1));
    CHECK_FALSE(p.missing(0, 0));
    CHECK(p.column(1).size() == 1);
}

TEST_CASE("load_panel rejects duplicate coordinates, bad cells and bad schemas") {
    const auto dup = testing::temp_file("meta_dup.csv", "site_id,lon,lat,alt_m\n1,10,50,0\n2,10,50,5\n");
    const auto panel = testing::temp_file("panel2.csv", "year,1,2\n2000,1,2\n2001,3,4\n");
    CHECK_THROWS_AS(io::load_panel(panel, dup), ValidationError);

    const auto meta = testing::temp_file("meta_ok.csv", "site_id,lon,lat,alt_m\n1,10,50,0\n2,11,50,5\n");
    const auto bad_cell = testing::temp_file("panel_bad.csv", "year,1,2\n2000,1,abc\n2001,3,4\n");
    try {
        io::load_panel(bad_cell, meta);
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.line() == 2);
    }
    const auto bad_header = testing::temp_file("panel_hdr.csv", "yr,1,2\n2000,1,2\n2001,3,4\n");
    CHECK_THROWS_AS(io::load_panel(bad_header, meta), IngestError);
    const auto ragged = testing::temp_file("panel_rag.csv", "year,1,2\n2000,1\n2001,3,4\n");
    CHECK_THROWS_AS(io::load_panel(ragged, meta), IngestError);
}

TEST_CASE("panel CSV round trip is bit exact") {
    Engine rng(11);
    std::lognormal_distribution<double> d(0.0, 3.0);
    Eigen::MatrixXd v(7, 4);
    for (long i = 0; i < v.size(); ++i) v.data()[i] = d(rng);
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> miss = Eigen::Matrix<bool, -1, -1>::Constant(7, 4, false);
    miss(2, 3) = true;
    BlockMaximaPanel p(v, MarginState::UnitFrechet, miss, {1990, 1991, 1992, 1993, 1994, 1995, 1996});
    std::vector<std::string> ids{"a", "b", "c", "d"};
    std::ostringstream os;
    io::write_panel_csv(os, p, ids);
    const auto f = testing::temp_file("roundtrip.csv", os.str());
    std::vector<std::string> back_ids;
    const auto q = io::read_panel_csv(f, back_ids, MarginState::UnitFrechet);
    CHECK(back_ids == ids);
    CHECK(q.missing(2, 3));
    for (long m = 0; m < 7; ++m)
        for (long i = 0; i < 4; ++i)
            if (!(m == 2 && i == 3)) CHECK(q.value(m, i) == p.value(m, i));
}

TEST_CASE("SiteSet and panel invariants") {
    CHECK_THROWS_AS(SiteSet({{0.0, 0.0}, {0.0, 0.0}}, {}), ValidationError);
    CHECK_THROWS_AS(SiteSet({{0.0, NAN}}, {}), ValidationError);
    CHECK_THROWS_AS(SiteSet({{0.0, 1.0}, {1.0, 2.0}}, {{1.0}}), ValidationError);
    CHECK_THROWS_AS(BlockMaximaPanel(Eigen::MatrixXd::Ones(1, 3), MarginState::Raw), ValidationError);
    Eigen::MatrixXd v = Eigen::MatrixXd::Ones(3, 2);
    v(1, 1) = -1.0;
    CHECK_THROWS_AS(BlockMaximaPanel(v, MarginState::UnitFrechet), ValidationError);
    CHECK_NOTHROW(BlockMaximaPanel(v, MarginState::Raw));
}

TEST_CASE("DependenceSpec parameter lists, bounds and family rules") {
    DependenceSpec et(Family::ExtremalT, Structure::M1);
    CHECK(et.names() == std::vector<std::string>{"nu", "q1", "q2", "theta", "q3", "alpha0", "nugget"});
    DependenceSpec br(Family::BrownResnick, Structure::Iso);
    CHECK_FALSE(br.has("nu"));
    CHECK(br.names() == std::vector<std::string>{"q", "alpha0", "nugget"});
    CHECK_THROWS_AS(DependenceSpec(Family::BrownResnick, Structure::MHG), ValidationError);
    et.set("alpha0", 2.5);
    CHECK_THROWS_AS(et.validate(), BoundsError);
    et.set("alpha0", 1.0);
    et.set("nugget", 1.2);
    CHECK_THROWS_AS(et.validate(), BoundsError);
    DependenceSpec bd(Family::BrownResnick, Structure::MBD);
    CHECK(bd.names() == std::vector<std::string>{"q1", "q2", "theta", "q3", "beta", "nugget"});
    et.set("nugget", 0.1);
    et.set_fixed("nu");
    CHECK(et.free_names().size() == 6);
    for (auto s : {Structure::Iso, Structure::Aniso, Structure::M1, Structure::M2, Structure::M3, Structure::MBD,
                   Structure::MHG})
        CHECK(structure_from_string(to_string(s)) == s);
}
