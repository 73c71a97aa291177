#include "doctest.h"

#include "plot_slice.hpp"
#include "run_config.hpp"

#include "ecomann/manifold.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>

using namespace ecomann::cli;

TEST_CASE("config registry") {
  std::set<std::string> names;
  for (const auto& k : config_registry()) CHECK(names.insert(k.name).second);
  for (const char* key : {"seed", "w_align", "epochs", "levels", "hidden", "threshold", "rrt_max_nodes", "codim"})
    CHECK(names.count(key) == 1);
  const std::string help = registry_help();
  for (const auto& n : names) CHECK(help.find(n) != std::string::npos);
}

TEST_CASE("config text is parsed and type checked") {
  RunConfig c;
  apply_config_text(c, "# comment\nepochs = 12\n  w_align=0.5 # trailing\nhidden = 8,4\ndisable_osa = true\ncodim = 2\n\n",
                    "test");
  CHECK(c.train.epochs == 12);
  CHECK(c.train.w_align == 0.5);
  CHECK(c.train.hidden == std::vector<int>{8, 4});
  CHECK(c.train.disable_osa);
  CHECK(c.train.codim == 2);
  apply_setting(c, "codim", "0");
  CHECK_FALSE(c.train.codim.has_value());

  CHECK_THROWS_AS(apply_config_text(c, "nope = 1\n", "test"), UsageError);
  CHECK_THROWS_AS(apply_config_text(c, "epochs\n", "test"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "epochs", "1.5"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "disable_osa", "maybe"), UsageError);
  CHECK_THROWS_AS(apply_setting(c, "hidden", ""), UsageError);
  CHECK_THROWS_AS(apply_assignment(c, "epochs"), UsageError);
  try {
    apply_config_text(c, "epochs = 1\nbad = 2\n", "f.cfg");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
  }
}

TEST_CASE("formatting round trips every key") {
  RunConfig a;
  apply_config_text(a, "seed = 5\nlearning_rate = 0.003\nnoise_sigmas = 0.01,0.02\nsphere_model = m.txt\n", "t");
  RunConfig b;
  apply_config_text(b, format_config(a), "round trip");
  CHECK(format_config(a) == format_config(b));
  CHECK(b.train.seed == 5);
  CHECK(b.noise_sigmas == std::vector<double>{0.01, 0.02});
}

TEST_CASE("seed falls back to the environment") {
  setenv("ECOMANN_SEED", "42", 1);
  RunConfig c;
  apply_seed_env(c);
  CHECK(c.train.seed == 42);
  RunConfig d;
  apply_setting(d, "seed", "3");
  apply_seed_env(d);
  CHECK(d.train.seed == 3);
  setenv("ECOMANN_SEED", "x", 1);
  RunConfig e;
  CHECK_THROWS_AS(apply_seed_env(e), UsageError);
  unsetenv("ECOMANN_SEED");
}

TEST_CASE("slice plot traces the zero level of the sphere") {
  const ecomann::SphereManifold sphere;
  SliceSpec spec;
  spec.anchor = Eigen::Vector3d::Zero();
  const std::string svg = plot_slice_svg(sphere, spec);
  const auto start = svg.find("stroke=\"#cc2222\"");
  REQUIRE(start != std::string::npos);
  const std::string zero = svg.substr(start, svg.find("</g>", start) - start);
  // pixel -> slice coordinates: 480 px span 3.0 units after a 30 px margin
  auto coord = [](double p) { return (p - 30.0) / 480.0 * 3.0 - 1.5; };
  int segments = 0;
  for (std::size_t pos = zero.find("<line"); pos != std::string::npos; pos = zero.find("<line", pos + 1)) {
    double x1, y1, x2, y2;
    REQUIRE(std::sscanf(zero.c_str() + pos, "<line x1=\"%lf\" y1=\"%lf\" x2=\"%lf\" y2=\"%lf\"", &x1, &y1, &x2, &y2) == 4);
    CHECK(std::abs(std::hypot(coord(x1), coord(y1)) - 1.0) <= 0.01);
    CHECK(std::abs(std::hypot(coord(x2), coord(y2)) - 1.0) <= 0.01);
    ++segments;
  }
  CHECK(segments > 40);
  spec.axis_v = 0;
  CHECK_THROWS_AS(plot_slice_svg(sphere, spec), ecomann::ParameterError);
}
