#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dctl/config.hpp"
#include "json.hpp"

using namespace dctl;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::SolveFailure;  // sentinel: parsed fine
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults") {
  const RunConfig c = parse_config("{}");
  CHECK(c.N == 32);
  CHECK(c.T == 1.0);
  CHECK(c.direct_params);
  const DerivedParams d = c.params();
  CHECK(d.alpha() == -1.3);
  CHECK(d.mu == 0.01);
  CHECK(d.eta == 0.05);
  CHECK(d.zeta == 0.01);
  CHECK(c.window_or_default() == doctest::Approx(0.8 * M_PI));
}

TEST_CASE("round trip is the identity") {
  const std::string text = R"({
    "params": {"alpha": -2.0, "beta_mean": 0.01, "gamma_mean": 0.02},
    "N": 16, "T": 2.0, "seed": 42, "window": 0.5,
    "gain": {"type": "bump", "center": 1.0, "radius": 0.7},
    "initial": {"type": "modes", "u": [[1, 0.5, -0.25]], "v": [[3, 0.0, 1.0]]},
    "target": {"type": "random", "amplitude": 0.3, "seed_offset": 9},
    "gamma_sweep": [0.5, 1.0], "n_values": [3, 4]
  })";
  const RunConfig a = parse_config(text);
  const RunConfig b = parse_config(a.to_json());
  CHECK(a.to_json() == b.to_json());
  CHECK_FALSE(b.direct_params);
  CHECK(b.params().mu == doctest::Approx(a.params().mu));
  CHECK(b.initial.u_modes.size() == 1);
  CHECK(*b.window == 0.5);
}

TEST_CASE("schema violations") {
  CHECK(code_of("{\"bogus\": 1}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"gain\": {\"kind\": \"bump\"}}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"N\": \"32\"}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"N\": 0}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"N\": 3.5}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"dt\": -1}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"params\": {\"alpha\": 0.5}}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"params\": {\"mu\": 0.1, \"beta_mean\": 0.1}}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"initial\": {\"type\": \"square\"}}") == ErrorCode::ConfigError);
  CHECK(code_of("{\"initial\": {\"u\": [[1, 2]]}}") == ErrorCode::ConfigError);
  CHECK(code_of("[1, 2]") == ErrorCode::ConfigError);
  CHECK(code_of("{\"N\": 3,") == ErrorCode::ConfigError);
  CHECK(code_of("{\"N\": 8}") == ErrorCode::SolveFailure);
}

TEST_CASE("published schema matches the parser") {
  const json schema = json::parse(read(std::string(DCTL_SOURCE_DIR) + "/docs/config.schema.json"));
  for (auto it = schema["properties"].begin(); it != schema["properties"].end(); ++it) {
    json cfg = json::object();
    if (it.value().contains("default"))
      cfg[it.key()] = it.value()["default"];
    else if (it.key() == "params" || it.key() == "gain" || it.key() == "initial" ||
             it.key() == "target")
      cfg[it.key()] = json::object();
    else if (it.key() == "window")
      cfg[it.key()] = 1.0;
    else
      FAIL("no default for " << it.key());
    INFO(it.key());
    CHECK_NOTHROW(parse_config(cfg.dump()));
  }
  const auto data = schema["$defs"]["data"]["properties"];
  for (auto it = data.begin(); it != data.end(); ++it) {
    json d = json::object();
    if (it.value().contains("default")) d[it.key()] = it.value()["default"];
    INFO(it.key());
    CHECK_NOTHROW(parse_config(json{{"initial", d}}.dump()));
  }
}

TEST_CASE("example configs parse") {
  for (const char* name : {"spectrum", "control_linear", "stabilize", "stabilize_linearized",
                           "control_nonlinear", "control_nonlinear_large", "global_steer",
                           "resonance"}) {
    INFO(name);
    CHECK_NOTHROW(parse_config(read(std::string(DCTL_SOURCE_DIR) + "/docs/configs/" + name + ".json")));
  }
}

TEST_CASE("data presets") {
  const auto d = DerivedParams::defaults();
  DataSpec s;
  s.type = "gaussian";
  s.amplitude = 2.5;
  const StatePair g = s.build(16, d, 0);
  CHECK(l2_norm(g) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(g.u.mean() == 0.0);

  s.type = "random";
  const StatePair r1 = s.build(16, d, 7), r2 = s.build(16, d, 7), r3 = s.build(16, d, 8);
  CHECK(r1 == r2);
  CHECK_FALSE(r1 == r3);
  CHECK_FALSE(s.build(16, d, 7, 1) == r1);

  s.type = "eigenmode";
  s.k = 3;
  s.amplitude = 1.0;
  s.branch = "minus";
  const StatePair e = s.build(16, d, 0);
  const auto z = eigvec(3, d).second;
  CHECK(std::abs(e.u[3] / e.v[3] - z[0] / z[1]) < 1e-12);

  s.type = "modes";
  s.amplitude = 0.0;
  s.u_modes = {{2, 1.0, 0.5}};
  const StatePair m = s.build(16, d, 0);
  CHECK(m.u[2] == cplx(1.0, 0.5));
  CHECK(m.u.coeff(-2) == cplx(1.0, -0.5));
  s.u_modes = {{17, 1.0, 0.0}};
  CHECK_THROWS_AS(s.build(16, d, 0), Error);

  s.type = "zero";
  CHECK(l2_norm(s.build(16, d, 0)) == 0.0);
}

}  // TEST_SUITE
