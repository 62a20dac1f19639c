#include "ds/config.hpp"

#include <fstream>
#include <sstream>

#include "ds/errors.hpp"
#include "json.hpp"

namespace ds {

namespace {

using nlohmann::json;

cd parse_complex(const json& j, const std::string& what) {
  if (j.is_number()) return cd(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return cd(j[0].get<double>(), j[1].get<double>());
  }
  throw ConfigError(what + " must be a number or a [re, im] pair");
}

cd field(const json& j, const std::string& key, const std::string& scope) {
  if (!j.contains(key)) {
    throw ConfigError(scope + " is missing \"" + key + "\"");
  }
  return parse_complex(j.at(key), scope + "." + key);
}

json dump_complex(cd z) { return json::array({z.real(), z.imag()}); }

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    RunConfig rc;
    if (!j.contains("seed") || !j.at("seed").is_object()) {
      throw ConfigError("config needs a \"seed\" object");
    }
    const json& s = j.at("seed");
    rc.seed = SeedParams::consistent(
        field(s, "q0", "seed"), field(s, "r0", "seed"), field(s, "m0", "seed"),
        field(s, "n0", "seed"), field(s, "alpha", "seed"), field(s, "beta", "seed"),
        field(s, "K", "seed"), field(s, "A0", "seed"));
    rc.seed.validate();

    if (j.contains("steps")) {
      if (!j.at("steps").is_array()) {
        throw ConfigError("\"steps\" must be an array");
      }
      for (const json& js : j.at("steps")) {
        StepParams st;
        st.lambda_l = field(js, "lambda", "step");
        st.lambda_lp = field(js, "lambda_prime", "step");
        st.a_l = field(js, "a", "step");
        st.b_l = js.contains("b") ? parse_complex(js.at("b"), "step.b") : cd{};
        if (!js.contains("f") || !js.at("f").is_array() || js.at("f").size() != 2 ||
            !js.at("f")[0].is_array() || js.at("f")[0].size() != 2 ||
            !js.at("f")[1].is_array() || js.at("f")[1].size() != 2) {
          throw ConfigError("step needs \"f\" as a 2x2 array");
        }
        st.f11 = parse_complex(js.at("f")[0][0], "step.f[0][0]");
        st.f12 = parse_complex(js.at("f")[0][1], "step.f[0][1]");
        st.f21 = parse_complex(js.at("f")[1][0], "step.f[1][0]");
        st.f22 = parse_complex(js.at("f")[1][1], "step.f[1][1]");
        if (js.contains("nu")) {
          if (!js.at("nu").is_array() || js.at("nu").size() != 2) {
            throw ConfigError("step \"nu\" must be a [nu1, nu2] pair");
          }
          st.nu1 = parse_complex(js.at("nu")[0], "step.nu[0]");
          st.nu2 = parse_complex(js.at("nu")[1], "step.nu[1]");
        }
        const bool lock = js.value("lock", false);
        const bool has_m = js.contains("m");
        if (lock == has_m) {
          throw ConfigError("each step needs exactly one of \"lock\": true or \"m\"");
        }
        if (lock) {
          st = lock_step(rc.seed, rc.steps, st);
        } else {
          const json& jm = js.at("m");
          if (!jm.is_array() || jm.size() != 2 || !jm[0].is_array() ||
              jm[0].size() != 2 || !jm[1].is_array() || jm[1].size() != 2) {
            throw ConfigError("step \"m\" must be a 2x2 array");
          }
          st.m1 = parse_complex(jm[0][0], "step.m[0][0]");
          st.m1p = parse_complex(jm[0][1], "step.m[0][1]");
          st.m2 = parse_complex(jm[1][0], "step.m[1][0]");
          st.m2p = parse_complex(jm[1][1], "step.m[1][1]");
        }
        st.validate();
        rc.steps.push_back(st);
      }
    }
    if (rc.steps.size() > kMaxDepth) {
      throw DepthExceeded("config lists more steps than the supported maximum of 8");
    }

    if (j.contains("grid")) {
      const json& g = j.at("grid");
      rc.grid.x_min = g.value("x_min", rc.grid.x_min);
      rc.grid.x_max = g.value("x_max", rc.grid.x_max);
      rc.grid.y_min = g.value("y_min", rc.grid.y_min);
      rc.grid.y_max = g.value("y_max", rc.grid.y_max);
      rc.grid.nx = g.value("nx", rc.grid.nx);
      rc.grid.ny = g.value("ny", rc.grid.ny);
      rc.grid.t = g.value("t", rc.grid.t);
    }
    rc.grid.validate();

    if (j.contains("form")) {
      const std::string f = j.at("form").get<std::string>();
      if (f == "kernel") {
        rc.form = StepForm::kernel;
      } else if (f == "entrywise") {
        rc.form = StepForm::entrywise;
      } else {
        throw ConfigError("\"form\" must be \"kernel\" or \"entrywise\"");
      }
    }

    if (j.contains("lambda_samples")) {
      for (const json& v : j.at("lambda_samples")) {
        rc.lambda_samples.push_back(parse_complex(v, "lambda_samples entry"));
      }
    }
    if (rc.lambda_samples.empty()) {
      rc.lambda_samples = {cd(1.45, 0.25), cd(0.8, -0.9)};
    }

    if (j.contains("tolerances")) {
      const json& t = j.at("tolerances");
      rc.tol.algebra = t.value("algebra", rc.tol.algebra);
      rc.tol.jet = t.value("jet", rc.tol.jet);
      rc.tol.pde = t.value("pde", rc.tol.pde);
      rc.tol.lax = t.value("lax", rc.tol.lax);
    }
    rc.time_step = j.value("time_step", rc.time_step);
    if (!(rc.time_step > 0.0) || rc.time_step > 1.0) {
      throw ConfigError("\"time_step\" must lie in (0, 1]");
    }
    return rc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config structure error: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render_config(const RunConfig& rc) {
  json j;
  json& s = j["seed"];
  s["q0"] = dump_complex(rc.seed.q0);
  s["r0"] = dump_complex(rc.seed.r0);
  s["m0"] = dump_complex(rc.seed.m0);
  s["n0"] = dump_complex(rc.seed.n0);
  s["alpha"] = dump_complex(rc.seed.alpha);
  s["beta"] = dump_complex(rc.seed.beta);
  s["K"] = dump_complex(rc.seed.K);
  s["a"] = dump_complex(rc.seed.a);
  s["b"] = dump_complex(rc.seed.b);
  s["xi1"] = dump_complex(rc.seed.xi1);
  s["xi2"] = dump_complex(rc.seed.xi2);
  s["A10"] = dump_complex(rc.seed.A10);
  s["A20"] = dump_complex(rc.seed.A20);
  j["steps"] = json::array();
  for (const StepParams& st : rc.steps) {
    json js;
    js["lambda"] = dump_complex(st.lambda_l);
    js["lambda_prime"] = dump_complex(st.lambda_lp);
    js["a"] = dump_complex(st.a_l);
    js["b"] = dump_complex(st.b_l);
    js["f"] = json::array({json::array({dump_complex(st.f11), dump_complex(st.f12)}),
                           json::array({dump_complex(st.f21), dump_complex(st.f22)})});
    js["m"] = json::array({json::array({dump_complex(st.m1), dump_complex(st.m1p)}),
                           json::array({dump_complex(st.m2), dump_complex(st.m2p)})});
    js["nu"] = json::array({dump_complex(st.nu1), dump_complex(st.nu2)});
    j["steps"].push_back(js);
  }
  const ChainConstants cc = chain_constants(rc.seed, rc.steps);
  j["level_constants"]["alpha"] = json::array();
  j["level_constants"]["beta"] = json::array();
  for (const cd& v : cc.alpha) j["level_constants"]["alpha"].push_back(dump_complex(v));
  for (const cd& v : cc.beta) j["level_constants"]["beta"].push_back(dump_complex(v));
  json& g = j["grid"];
  g["x_min"] = rc.grid.x_min;
  g["x_max"] = rc.grid.x_max;
  g["y_min"] = rc.grid.y_min;
  g["y_max"] = rc.grid.y_max;
  g["nx"] = rc.grid.nx;
  g["ny"] = rc.grid.ny;
  g["t"] = rc.grid.t;
  j["form"] = rc.form == StepForm::kernel ? "kernel" : "entrywise";
  j["lambda_samples"] = json::array();
  for (const cd& v : rc.lambda_samples) j["lambda_samples"].push_back(dump_complex(v));
  json& t = j["tolerances"];
  t["algebra"] = rc.tol.algebra;
  t["jet"] = rc.tol.jet;
  t["pde"] = rc.tol.pde;
  t["lax"] = rc.tol.lax;
  j["time_step"] = rc.time_step;
  return j.dump(2) + "\n";
}

void apply_tolerance_override(RunConfig& rc, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 >= assignment.size()) {
    throw ConfigError("tolerance override must look like name=value");
  }
  const std::string name = assignment.substr(0, eq);
  const std::string val = assignment.substr(eq + 1);
  char* end = nullptr;
  const double v = std::strtod(val.c_str(), &end);
  if (end == val.c_str() || *end != '\0' || !(v > 0.0)) {
    throw ConfigError("tolerance value must be a positive number: " + assignment);
  }
  if (name == "algebra") {
    rc.tol.algebra = v;
  } else if (name == "jet") {
    rc.tol.jet = v;
  } else if (name == "pde") {
    rc.tol.pde = v;
  } else if (name == "lax") {
    rc.tol.lax = v;
  } else {
    throw ConfigError("unknown tolerance name: " + name);
  }
}

}  // namespace ds
