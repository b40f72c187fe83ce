#include <doctest.h>

#include <cmath>

#include "cycleforge/verify.hpp"

using namespace cycleforge;

TEST_CASE("default criteria per regime") {
  CHECK(default_criteria(std::nullopt).size() == 9);
  CHECK(default_criteria(Regime::Apos) == std::vector<int>{1, 3, 4, 5, 6, 7});
  CHECK(default_criteria(Regime::Aneg) == std::vector<int>{2, 3, 4, 6, 7});
}

TEST_CASE("draw seeds are deterministic and distinct") {
  CHECK(draw_seed(7, 1, 3) == draw_seed(7, 1, 3));
  CHECK(draw_seed(7, 1, 3) != draw_seed(7, 1, 4));
  CHECK(draw_seed(7, 1, 3) != draw_seed(7, 2, 3));
  CHECK(draw_seed(7, 1, 3) != draw_seed(8, 1, 3));
}

TEST_CASE("random draws respect their ranges") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    const CanonicalApos c = random_apos(draw_seed(1, 0, i));
    CHECK(c.a >= 0.5);
    CHECK(c.a <= 2.0);
    CHECK(-c.b >= 0.5);
    CHECK(-c.b <= 2.0);
    CHECK(c.dk(3) == 0.0);
    CHECK(c.eps == 0.01);
    const CanonicalAneg e = random_aneg(draw_seed(1, 1, i));
    CHECK(e.a < 0.0);
    CHECK(e.b > 0.0);
    CHECK(e.ek(3) == 0.0);
    const OscParams p = random_params(Regime::Aneg, draw_seed(1, 2, i));
    CHECK(p.a < 0.0);
    CHECK(p.b > 0.0);
    CHECK(p.eps == 0.05);
  }
}

TEST_CASE("search setup geometry") {
  const SearchSetup s = search_setup(Regime::Apos, 1.0, -1.0);
  CHECK(s.loop_extent == doctest::Approx(std::sqrt(0.5)));
  CHECK(s.loop_crossing == doctest::Approx(std::sqrt(0.5)));
  CHECK(s.interval.first == doctest::Approx(1e-4));
  CHECK(s.interval.second == doctest::Approx(0.999 * std::sqrt(0.5)));
  CHECK(s.escape_box.xmax == doctest::Approx(4 * std::sqrt(0.5)));
  const SearchSetup n = search_setup(Regime::Aneg, -1.0, 1.0);
  CHECK(n.interval.second == doctest::Approx(0.999 * (std::sqrt(2.0) - 1.0)));
}

TEST_CASE("serial reference and OpenMP batches give identical results") {
  for (int id : {3, 6, 9}) {
    VerifyOptions par;
    par.draws = 6;
    VerifyOptions ser = par;
    ser.parallel = false;
    const CriterionResult a = run_criterion(id, par), b = run_criterion(id, ser);
    CHECK(a.passed == b.passed);
    REQUIRE(a.metrics.size() == b.metrics.size());
    for (std::size_t i = 0; i < a.metrics.size(); ++i) {
      CHECK(a.metrics[i].first == b.metrics[i].first);
      CHECK(a.metrics[i].second == b.metrics[i].second);
    }
  }
}

TEST_CASE("unknown criterion ids are rejected") {
  CHECK_THROWS_AS(run_criterion(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(run_criterion(10, {}), std::invalid_argument);
}

TEST_CASE("criterion metrics lookup") {
  CriterionResult r;
  r.metrics = {{"x", 2.0}};
  CHECK(r.metric("x") == 2.0);
  CHECK_THROWS_AS(r.metric("y"), std::out_of_range);
}
