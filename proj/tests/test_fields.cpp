#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ds/errors.hpp"
#include "ds/fields.hpp"
#include "test_support.hpp"

using ds::cd;

namespace {

ds::GridSpec probe_grid() {
  ds::GridSpec g;
  g.x_min = 0.1;
  g.x_max = 0.5;
  g.y_min = -0.4;
  g.y_max = 0.0;
  g.nx = 5;
  g.ny = 5;
  g.t = 0.1;
  return g;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("grid sampling and storage order") {
  const ds::GridSpec g = probe_grid();
  g.validate();
  CHECK(g.x(2) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(g.y(2) == doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(g.index(3, 1) == 1u * 5u + 3u);
  CHECK(g.count() == 25u);
  ds::GridSpec bad = g;
  bad.nx = 4;
  CHECK_THROWS_AS(bad.validate(), ds::GridTooSmall);
  bad = g;
  bad.x_max = bad.x_min;
  CHECK_THROWS_AS(bad.validate(), ds::ConfigError);
}

TEST_CASE("background fields are the constant seed values") {
  const ds::SeedParams seed = ts::standard_seed();
  const ds::FieldGrid fg = ds::seed_fields(seed, probe_grid());
  REQUIRE(fg.q.size() == 25u);
  for (std::size_t i = 0; i < fg.q.size(); ++i) {
    CHECK(fg.q[i] == seed.q0);
    CHECK(fg.r[i] == seed.r0);
    CHECK(fg.A1[i] == seed.A10);
    CHECK(fg.A2[i] == seed.A20);
  }
}

TEST_CASE("chained fields match frozen reference values at the probe point") {
  const ds::SeedParams seed = ts::standard_seed();
  const std::vector<ds::StepParams> steps = ts::locked_reduced_steps(seed, 3);
  const ds::ChainEvaluator chain(seed, steps, ds::StepForm::kernel);
  const std::vector<ds::FieldGrid> levels = ds::chain_fields(chain, probe_grid());
  REQUIRE(levels.size() == 3u);
  const std::size_t at = probe_grid().index(2, 2);  // (0.3, -0.2)
  const cd want_q[3] = {cd(0.4450245835263370052659, -0.5142278763698397480591),
                        cd(-0.4808471896113853083521, 0.3284105611193636494322),
                        cd(-0.4226741559421915032848, -0.08901872876748701719785)};
  const cd want_r[3] = {cd(-0.3511111233026506799402, -0.04617975740330034415877),
                        cd(0.4102374222724703222159, -0.05256076879592990390051),
                        cd(0.3314347117607236368315, -0.4483451236518852939834)};
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(levels[k].q[at] - want_q[k]) < 1e-13);
    CHECK(std::abs(levels[k].r[at] - want_r[k]) < 1e-13);
  }
}

TEST_CASE("locked chains leave the mean-flow potentials at the background level") {
  const ds::SeedParams seed = ts::standard_seed();
  const std::vector<ds::StepParams> steps = ts::locked_reduced_steps(seed, 2);
  const ds::ChainEvaluator chain(seed, steps, ds::StepForm::kernel);
  ds::GridSpec g;
  g.x_min = -1.0;
  g.x_max = 1.0;
  g.y_min = -1.2;
  g.y_max = 0.8;
  g.nx = 9;
  g.ny = 9;
  g.t = 0.05;
  const std::vector<ds::FieldGrid> levels = ds::chain_fields(chain, g);
  for (const ds::FieldGrid& fg : levels) {
    // The x-slope integrand differences in y, so rows away from the y edges
    // stay at the background value; the y-slope integrand differences in x.
    for (int iy = 1; iy + 1 < g.ny; ++iy)
      for (int ix = 0; ix < g.nx; ++ix)
        CHECK(std::abs(fg.A1[g.index(ix, iy)] - seed.A10) < 1e-10);
    for (int ix = 1; ix + 1 < g.nx; ++ix)
      for (int iy = 0; iy < g.ny; ++iy)
        CHECK(std::abs(fg.A2[g.index(ix, iy)] - seed.A20) < 1e-10);
  }
}

TEST_CASE("thread count honours the environment override") {
  setenv("DS_THREADS", "3", 1);
  CHECK(ds::thread_count() == 3);
  setenv("DS_THREADS", "abc", 1);
  CHECK_THROWS_AS(ds::thread_count(), ds::ConfigError);
  setenv("DS_THREADS", "0", 1);
  CHECK_THROWS_AS(ds::thread_count(), ds::ConfigError);
  setenv("DS_THREADS", "2000", 1);
  CHECK_THROWS_AS(ds::thread_count(), ds::ConfigError);
  unsetenv("DS_THREADS");
  CHECK(ds::thread_count() >= 1);
}

TEST_CASE("parallel evaluation is bitwise reproducible") {
  const ds::SeedParams seed = ts::standard_seed();
  const std::vector<ds::StepParams> steps = ts::locked_reduced_steps(seed, 2);
  const ds::ChainEvaluator chain(seed, steps, ds::StepForm::kernel);
  ds::GridSpec g = probe_grid();
  g.nx = 11;
  g.ny = 7;
  setenv("DS_THREADS", "1", 1);
  const std::vector<ds::FieldGrid> serial = ds::chain_fields(chain, g);
  setenv("DS_THREADS", "4", 1);
  const std::vector<ds::FieldGrid> parallel = ds::chain_fields(chain, g);
  unsetenv("DS_THREADS");
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t l = 0; l < serial.size(); ++l)
    for (std::size_t i = 0; i < serial[l].q.size(); ++i) {
      CHECK(serial[l].q[i] == parallel[l].q[i]);
      CHECK(serial[l].r[i] == parallel[l].r[i]);
      CHECK(serial[l].A1[i] == parallel[l].A1[i]);
      CHECK(serial[l].A2[i] == parallel[l].A2[i]);
    }
}

TEST_CASE("CSV writing is deterministic and read-back is exact") {
  const ds::SeedParams seed = ts::standard_seed();
  const std::vector<ds::StepParams> steps = ts::locked_reduced_steps(seed, 1);
  const ds::ChainEvaluator chain(seed, steps, ds::StepForm::kernel);
  ds::GridSpec g = probe_grid();
  g.nx = 6;
  g.ny = 5;
  const ds::FieldGrid fg = ds::chain_fields(chain, g).front();
  const std::string pa = "test_fields_a.csv";
  const std::string pb = "test_fields_b.csv";
  ds::write_csv(fg, pa);
  ds::write_csv(fg, pb);
  const std::string bytes_a = slurp(pa);
  REQUIRE(!bytes_a.empty());
  CHECK(bytes_a == slurp(pb));
  CHECK(bytes_a.find('\r') == std::string::npos);
  CHECK(bytes_a.rfind("x,y,re_q,im_q,re_r,im_r,re_A1,im_A1,re_A2,im_A2\n", 0) == 0);

  const ds::FieldGrid back = ds::read_csv(pa);
  REQUIRE(back.grid.nx == g.nx);
  REQUIRE(back.grid.ny == g.ny);
  for (std::size_t i = 0; i < fg.q.size(); ++i) {
    CHECK(back.q[i] == fg.q[i]);
    CHECK(back.r[i] == fg.r[i]);
    CHECK(back.A1[i] == fg.A1[i]);
    CHECK(back.A2[i] == fg.A2[i]);
  }
  std::remove(pa.c_str());
  std::remove(pb.c_str());
}

TEST_CASE("malformed CSV input is rejected") {
  const std::string path = "test_fields_bad.csv";
  {
    std::ofstream out(path, std::ios::binary);
    out << "x,y,re_q,im_q,re_r,im_r,re_A1,im_A1,re_A2,im_A2\n";
    out << "0,0,1,2,3,4,5,6,7\n";  // nine columns, not ten
  }
  CHECK_THROWS_AS(ds::read_csv(path), ds::ConfigError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(ds::read_csv("no_such_file_here.csv"), ds::ConfigError);
}

TEST_CASE("product formula reproduces the per-entry recursion") {
  const ds::SeedParams seed = ts::standard_seed();
  const std::vector<ds::StepParams> steps = ts::locked_reduced_steps(seed, 3);
  const ds::ChainEvaluator chain(seed, steps, ds::StepForm::entrywise);
  const cd delta = ds::growth_delta_closed(seed);
  CHECK(std::abs(delta - cd(0.03234742067986737945834, 0.1114388798915917041068)) < 1e-15);
  const cd fitted = ds::growth_delta_fit(seed, steps);
  CHECK(std::abs(fitted - delta) < 1e-10);

  const double pts[3][3] = {
      {0.3, -0.2, 0.1}, {-0.45, 0.35, -0.27}, {0.05, 0.6, 0.42}};
  for (const double* p : pts) {
    const std::vector<ds::StepMatrices> sm = chain.step_matrices(p[0], p[1], p[2]);
    cd q = seed.q0, r = seed.r0;
    for (std::size_t n = 1; n <= 3; ++n) {
      const ds::StepMatrices& s = sm[n - 1];
      const cd qn = (-2.0 * s.Q(0, 1).dx + s.Q(0, 0).v * q) / s.Q(1, 1).v;
      const cd rn = (-2.0 * s.Q(1, 0).dy + s.Q(1, 1).v * r) / s.Q(0, 0).v;
      q = qn;
      r = rn;
      const cd qc = ds::compact_q(seed, steps, n, p[0], p[1], p[2], delta);
      CHECK(std::abs(qc - q) < 1e-12 * std::max(1.0, std::abs(q)));
    }
  }
}

TEST_CASE("each reading flag of the product formula is load-bearing") {
  const ds::SeedParams seed = ts::standard_seed();
  const std::vector<ds::StepParams> steps = ts::locked_reduced_steps(seed, 2);
  const ds::ChainEvaluator chain(seed, steps, ds::StepForm::entrywise);
  const cd delta = ds::growth_delta_closed(seed);
  const double x = 0.3, y = -0.2, t = 0.1;
  const std::vector<ds::StepMatrices> sm = chain.step_matrices(x, y, t);
  cd q = seed.q0;
  for (std::size_t n = 1; n <= 2; ++n)
    q = (-2.0 * sm[n - 1].Q(0, 1).dx + sm[n - 1].Q(0, 0).v * q) / sm[n - 1].Q(1, 1).v;

  ds::CompactFlags flip_slope;
  flip_slope.slope_plus_im = false;
  CHECK(std::abs(ds::compact_q(seed, steps, 2, x, y, t, delta, flip_slope) - q) > 1e-2);

  // The unprimed second-row slots hold an inert marker value, so misreading
  // the row phase produces a visibly different field.
  ds::CompactFlags flip_row;
  flip_row.primed_row_phase = false;
  CHECK(std::abs(ds::compact_q(seed, steps, 2, x, y, t, delta, flip_row) - q) > 1e-2);

  ds::CompactFlags no_seed;
  no_seed.include_seed_background = false;
  CHECK(std::abs(ds::compact_q(seed, steps, 2, x, y, t, delta, no_seed) - q) > 1e-2);
}

TEST_CASE("product formula rejects unusable configurations") {
  const ds::SeedParams seed = ts::standard_seed();
  const std::vector<ds::StepParams> steps = ts::locked_reduced_steps(seed, 2);
  const cd delta = ds::growth_delta_closed(seed);
  CHECK_THROWS_AS(ds::compact_q(seed, steps, 0, 0.0, 0.0, 0.0, delta), ds::ConfigError);
  CHECK_THROWS_AS(ds::compact_q(seed, steps, 3, 0.0, 0.0, 0.0, delta), ds::ConfigError);
  std::vector<ds::StepParams> offdiag = steps;
  offdiag[1].f12 = cd(0.3, -0.45);
  CHECK_THROWS_AS(ds::compact_q(seed, offdiag, 2, 0.0, 0.0, 0.0, delta), ds::ConfigError);
}
