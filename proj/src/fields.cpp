#include "ds/fields.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "ds/errors.hpp"

namespace ds {

namespace {
constexpr cd kI{0.0, 1.0};
}

void GridSpec::validate() const {
  if (nx < 5 || ny < 5) {
    throw GridTooSmall("grid needs at least 5 samples per axis");
  }
  if (!(x_max > x_min) || !(y_max > y_min)) {
    throw ConfigError("grid extents must be increasing");
  }
}

FieldGrid seed_fields(const SeedParams& seed, const GridSpec& grid) {
  grid.validate();
  seed.validate();
  FieldGrid fg;
  fg.grid = grid;
  const std::size_t n = grid.count();
  fg.q.assign(n, seed.q0);
  fg.r.assign(n, seed.r0);
  fg.A1.assign(n, seed.A10);
  fg.A2.assign(n, seed.A20);
  return fg;
}

int thread_count() {
  if (const char* env = std::getenv("DS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw ConfigError("DS_THREADS must be an integer in [1, 1024]");
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace {

// Per-point recursion through the chain's transfer matrices.
void point_fields(const ChainEvaluator& chain, double x, double y, double t,
                  std::vector<cd>& q_out, std::vector<cd>& r_out) {
  const std::vector<StepMatrices> qp = chain.step_matrices(x, y, t);
  cd q = chain.seed().q0;
  cd r = chain.seed().r0;
  q_out.clear();
  r_out.clear();
  for (const StepMatrices& sm : qp) {
    const Jet& Q11 = sm.Q(0, 0);
    const Jet& Q12 = sm.Q(0, 1);
    const Jet& Q21 = sm.Q(1, 0);
    const Jet& Q22 = sm.Q(1, 1);
    if (mag(Q22) < 1e-300 || mag(Q11) < 1e-300) {
      throw VanishingDenominator("transfer-matrix diagonal vanishes at this point");
    }
    const cd qn = (-2.0 * Q12.dx + Q11.v * q) / Q22.v;
    const cd rn = (-2.0 * Q21.dy + Q22.v * r) / Q11.v;
    q = qn;
    r = rn;
    q_out.push_back(q);
    r_out.push_back(r);
  }
}

// Centred difference with one-sided fallbacks on a uniform line of values.
cd line_diff(const std::vector<cd>& v, std::size_t stride, std::size_t base, int i, int n,
             double h) {
  if (i > 0 && i < n - 1) {
    return (v[base + (i + 1) * stride] - v[base + (i - 1) * stride]) / (2.0 * h);
  }
  if (i == 0) return (v[base + stride] - v[base]) / h;
  return (v[base + i * stride] - v[base + (i - 1) * stride]) / h;
}

}  // namespace

std::vector<FieldGrid> chain_fields(const ChainEvaluator& chain, const GridSpec& grid) {
  grid.validate();
  const std::size_t depth = chain.depth();
  const std::size_t n = grid.count();
  std::vector<FieldGrid> levels(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    levels[l].grid = grid;
    levels[l].q.assign(n, cd{});
    levels[l].r.assign(n, cd{});
    levels[l].A1.assign(n, chain.seed().A10);
    levels[l].A2.assign(n, chain.seed().A20);
  }
  if (depth == 0) return levels;

  const int workers = std::min(thread_count(), grid.ny);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto run_rows = [&](int w) {
    try {
      std::vector<cd> qs, rs;
      for (int iy = w; iy < grid.ny; iy += workers) {
        const double y = grid.y(iy);
        for (int ix = 0; ix < grid.nx; ++ix) {
          point_fields(chain, grid.x(ix), y, grid.t, qs, rs);
          const std::size_t idx = grid.index(ix, iy);
          for (std::size_t l = 0; l < depth; ++l) {
            levels[l].q[idx] = qs[l];
            levels[l].r[idx] = rs[l];
          }
        }
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers <= 1) {
    run_rows(0);
  } else {
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run_rows, w);
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Potentials: A1 slopes in x with integrand -(q_y r + r_y q)/2, A2 slopes in
  // y with integrand -(q_x r + r_x q)/2; cumulative trapezoid anchored at the
  // window edge with the background level.
  const double hx = grid.dx();
  const double hy = grid.dy();
  for (std::size_t l = 0; l < depth; ++l) {
    FieldGrid& fg = levels[l];
    std::vector<cd> integ(n);
    const std::size_t sx = 1;
    const std::size_t sy = static_cast<std::size_t>(grid.nx);
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        const std::size_t idx = grid.index(ix, iy);
        const cd qy = line_diff(fg.q, sy, static_cast<std::size_t>(ix), iy, grid.ny, hy);
        const cd ry = line_diff(fg.r, sy, static_cast<std::size_t>(ix), iy, grid.ny, hy);
        integ[idx] = -0.5 * (qy * fg.r[idx] + ry * fg.q[idx]);
      }
    for (int iy = 0; iy < grid.ny; ++iy) {
      cd acc = chain.seed().A10;
      fg.A1[grid.index(0, iy)] = acc;
      for (int ix = 1; ix < grid.nx; ++ix) {
        acc += 0.5 * hx * (integ[grid.index(ix - 1, iy)] + integ[grid.index(ix, iy)]);
        fg.A1[grid.index(ix, iy)] = acc;
      }
    }
    for (int iy = 0; iy < grid.ny; ++iy)
      for (int ix = 0; ix < grid.nx; ++ix) {
        const std::size_t idx = grid.index(ix, iy);
        const cd qx = line_diff(fg.q, sx, grid.index(0, iy), ix, grid.nx, hx);
        const cd rx = line_diff(fg.r, sx, grid.index(0, iy), ix, grid.nx, hx);
        integ[idx] = -0.5 * (qx * fg.r[idx] + rx * fg.q[idx]);
      }
    for (int ix = 0; ix < grid.nx; ++ix) {
      cd acc = chain.seed().A20;
      fg.A2[grid.index(ix, 0)] = acc;
      for (int iy = 1; iy < grid.ny; ++iy) {
        acc += 0.5 * hy * (integ[grid.index(ix, iy - 1)] + integ[grid.index(ix, iy)]);
        fg.A2[grid.index(ix, iy)] = acc;
      }
    }
  }
  return levels;
}

cd growth_delta_closed(const SeedParams& seed) {
  const cd m0 = seed.m0, n0 = seed.n0, a = seed.a, b = seed.b;
  return kI * (a * a * (m0 * m0 - n0 * n0) +
               b * b * (1.0 / (m0 * m0) - 1.0 / (n0 * n0)));
}

cd growth_delta_fit(const SeedParams& seed, const std::vector<StepParams>& steps) {
  if (steps.empty()) {
    throw ConfigError("growth fit needs at least one step");
  }
  const std::vector<StepParams> first(steps.begin(), steps.begin() + 1);
  ChainEvaluator chain(seed, first, StepForm::entrywise);
  const double x = 0.3, y = -0.2, tau = 0.1;
  const cd qA = chain.step_matrices(x, y, 0.0).front().Q(0, 1).v;
  const cd qB = chain.step_matrices(x, y, tau).front().Q(0, 1).v;
  if (std::abs(qA) < 1e-300 || std::abs(qB) < 1e-300) {
    throw VanishingDenominator("growth fit sample vanishes");
  }
  return std::log(qB / qA) / tau;
}

cd compact_q(const SeedParams& seed, const std::vector<StepParams>& steps,
             std::size_t n, double x, double y, double t, cd delta,
             const CompactFlags& flags) {
  if (n == 0 || n > steps.size()) {
    throw ConfigError("compact depth must lie in [1, steps]");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const StepParams& st = steps[k];
    if (std::abs(st.f12) + std::abs(st.f21) > 1e-12 || std::abs(st.b_l) > 1e-12) {
      throw ConfigError("compact formula needs diagonal steps with b = 0");
    }
  }
  const cd m0 = seed.m0, n0 = seed.n0, a = seed.a, b = seed.b;
  const cd z = cd(x - y, 0.0);
  const cd mbar0 = a * (m0 - n0);
  const cd mbar0p = b * (1.0 / m0 - 1.0 / n0);
  const cd grow = cexp_guarded(mbar0 * x + mbar0p * y + delta * t);

  auto lam = [&](std::size_t k) { return steps[k - 1].lambda_l; };
  auto lamp = [&](std::size_t k) { return steps[k - 1].lambda_lp; };
  auto f11 = [&](std::size_t k) { return steps[k - 1].f11; };
  auto f22 = [&](std::size_t k) { return steps[k - 1].f22; };
  auto m1 = [&](std::size_t k) { return steps[k - 1].m1; };
  auto m2row = [&](std::size_t k) {
    return flags.primed_row_phase ? steps[k - 1].m2p : steps[k - 1].m2;
  };
  auto Q12 = [&](std::size_t k) {
    const cd T = (m0 / n0) * (1.0 - lam(k) * lam(k) / (lamp(k) * lamp(k)));
    return T * f11(k) * cexp_guarded(kI * m1(k) * z) * grow;
  };
  auto mbar = [&](std::size_t k) {
    return flags.slope_plus_im ? (kI * m1(k) + mbar0) : (-kI * m1(k) + mbar0);
  };
  auto ratio_prod = [&](std::size_t K) {
    cd p{1.0, 0.0};
    for (std::size_t l = 1; l <= K; ++l) {
      p *= lam(n - l + 1) * lam(n - l + 1) / (lamp(n - l + 1) * lamp(n - l + 1));
    }
    return p;
  };
  auto top_prod = [&](std::size_t K) {
    cd p{1.0, 0.0};
    for (std::size_t l = 1; l <= K; ++l) p *= f11(n - l + 1);
    return p;
  };
  auto bot_prod = [&](std::size_t K) {
    cd p{1.0, 0.0};
    for (std::size_t l = 1; l <= K; ++l) p *= f22(n - l + 1);
    return p;
  };
  auto top_phase = [&](std::size_t K) {
    cd s{};
    for (std::size_t j = 1; j <= K; ++j) s += m1(n - j + 1);
    return s;
  };
  auto bot_phase = [&](std::size_t K) {
    cd s{};
    for (std::size_t j = 1; j <= K; ++j) s += m2row(n - j + 1);
    return s;
  };

  cd out = -2.0 * mbar(n) * Q12(n) / (bot_prod(1) * cexp_guarded(kI * m2row(n) * z));
  cd tail = ratio_prod(n) * top_prod(n) * cexp_guarded(kI * top_phase(n) * z) /
            (bot_prod(n) * cexp_guarded(kI * bot_phase(n) * z));
  if (flags.include_seed_background) tail *= seed.q0;
  out += tail;
  for (std::size_t K = 1; K < n; ++K) {
    out += -2.0 * ratio_prod(K) * top_prod(K) * cexp_guarded(kI * top_phase(K) * z) /
           (bot_prod(K + 1) * cexp_guarded(kI * bot_phase(K + 1) * z)) * mbar(n - K) *
           Q12(n - K);
  }
  return out;
}

void write_csv(const FieldGrid& fg, const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) {
    throw ConfigError("cannot open output file: " + path);
  }
  std::fputs("x,y,re_q,im_q,re_r,im_r,re_A1,im_A1,re_A2,im_A2\n", fp);
  const GridSpec& g = fg.grid;
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const std::size_t idx = g.index(ix, iy);
      std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                   g.x(ix), g.y(iy), fg.q[idx].real(), fg.q[idx].imag(),
                   fg.r[idx].real(), fg.r[idx].imag(), fg.A1[idx].real(),
                   fg.A1[idx].imag(), fg.A2[idx].real(), fg.A2[idx].imag());
    }
  std::fclose(fp);
}

FieldGrid read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open input file: " + path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("empty field file: " + path);
  }
  std::vector<std::array<double, 10>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 10> row{};
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < 10; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw ConfigError("malformed field row in " + path);
      }
      row[static_cast<std::size_t>(c)] = std::strtod(cell.c_str(), nullptr);
    }
    rows.push_back(row);
  }
  if (rows.size() < 25) {
    throw GridTooSmall("field file has fewer than 25 samples");
  }
  // Reconstruct the grid: x varies fastest, so nx = run length of the first y.
  std::size_t nx = 1;
  while (nx < rows.size() && rows[nx][1] == rows[0][1]) ++nx;
  if (nx < 2 || rows.size() % nx != 0) {
    throw ConfigError("field file is not a full rectangular grid");
  }
  const std::size_t ny = rows.size() / nx;
  FieldGrid fg;
  fg.grid.nx = static_cast<int>(nx);
  fg.grid.ny = static_cast<int>(ny);
  fg.grid.x_min = rows[0][0];
  fg.grid.x_max = rows[nx - 1][0];
  fg.grid.y_min = rows[0][1];
  fg.grid.y_max = rows[rows.size() - 1][1];
  fg.grid.validate();
  fg.q.reserve(rows.size());
  fg.r.reserve(rows.size());
  fg.A1.reserve(rows.size());
  fg.A2.reserve(rows.size());
  for (const auto& row : rows) {
    fg.q.emplace_back(row[2], row[3]);
    fg.r.emplace_back(row[4], row[5]);
    fg.A1.emplace_back(row[6], row[7]);
    fg.A2.emplace_back(row[8], row[9]);
  }
  return fg;
}

}  // namespace ds
