#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "mfc/config.hpp"
#include "mfc/io.hpp"
#include "mfc/measure.hpp"

namespace {

std::filesystem::path scratch_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "mfc_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  mfc::io::write_text_file(path, content);
  return path;
}

}  // namespace

TEST_CASE("a partial config file resolves to the full closure") {
  const auto path = scratch_file("partial.json", R"({
    "beta": 0.5,
    "model": {"kind": "random", "seed": 9, "n_states": 2},
    "scenarios": [{"kind": "example"}, {"eps": 0.25, "open_loop": true}],
    "agent_counts": [10, 100],
    "root_seed": 42
  })");
  const mfc::ExperimentConfig cfg = mfc::load_config(path.string());
  REQUIRE(cfg.beta == 0.5);
  REQUIRE(cfg.model.seed == 9);
  REQUIRE(cfg.model.n_states == 2);
  REQUIRE(cfg.model.n_actions == 2);  // default fills in
  REQUIRE(cfg.scenarios.size() == 2);
  REQUIRE(cfg.scenarios[0].kind == "example");
  REQUIRE(cfg.scenarios[1].eps == 0.25);
  REQUIRE(cfg.scenarios[1].open_loop);
  REQUIRE(cfg.agent_counts == std::vector<int>{10, 100});
  REQUIRE(cfg.root_seed == 42);
  REQUIRE(cfg.grid_resolution == 8);  // untouched default
  REQUIRE_NOTHROW(mfc::validate_config(cfg));

  SECTION("the emitted closure reparses to the same closure") {
    const mfc::ConfigJson closure = mfc::to_json(cfg);
    const mfc::ExperimentConfig again = mfc::parse_config(closure);
    REQUIRE(mfc::to_json(again).dump() == closure.dump());
    REQUIRE(mfc::io::config_hash(again) == mfc::io::config_hash(cfg));
  }

  SECTION("the hash ignores the output directory but not the seed") {
    mfc::ExperimentConfig moved = cfg;
    moved.out_dir = "somewhere/else";
    REQUIRE(mfc::io::config_hash(moved) == mfc::io::config_hash(cfg));
    mfc::ExperimentConfig reseeded = cfg;
    reseeded.root_seed = 43;
    REQUIRE(mfc::io::config_hash(reseeded) != mfc::io::config_hash(cfg));
  }
}

TEST_CASE("bad config input is refused with the offending key path") {
  SECTION("unknown keys name themselves and their location") {
    REQUIRE_THROWS_WITH(mfc::parse_config(mfc::ConfigJson::parse(R"({"betaa": 0.5})")),
                        Catch::Matchers::ContainsSubstring("unknown key \"betaa\""));
    REQUIRE_THROWS_WITH(
        mfc::parse_config(mfc::ConfigJson::parse(R"({"model": {"kernelBlend": 0.1}})")),
        Catch::Matchers::ContainsSubstring("config.model: unknown key \"kernelBlend\""));
    REQUIRE_THROWS_WITH(
        mfc::parse_config(
            mfc::ConfigJson::parse(R"({"scenarios": [{}, {"mode": "open"}]})")),
        Catch::Matchers::ContainsSubstring("config.scenarios[1]: unknown key \"mode\""));
  }

  SECTION("type mismatches point at the key") {
    REQUIRE_THROWS_WITH(mfc::parse_config(mfc::ConfigJson::parse(R"({"beta": "hot"})")),
                        Catch::Matchers::ContainsSubstring("config.beta: expected a number"));
    REQUIRE_THROWS_WITH(
        mfc::parse_config(mfc::ConfigJson::parse(R"({"model": {"seed": -3}})")),
        Catch::Matchers::ContainsSubstring("config.model.seed: expected a nonnegative integer"));
    REQUIRE_THROWS_WITH(
        mfc::parse_config(mfc::ConfigJson::parse(R"({"agent_counts": [10, "many"]})")),
        Catch::Matchers::ContainsSubstring("config.agent_counts"));
    REQUIRE_THROWS_WITH(
        mfc::parse_config(mfc::ConfigJson::parse(
            R"({"model": {"kernel_table": [[[0.5, "x"]]]}})")),
        Catch::Matchers::ContainsSubstring("config.model.kernel_table[0][0]"));
  }

  SECTION("unreadable or unparsable files name the file") {
    REQUIRE_THROWS_AS(mfc::load_config("/nonexistent/config.json"), mfc::ConfigError);
    const auto path = scratch_file("broken.json", "{\"beta\": 0.5,,}");
    REQUIRE_THROWS_WITH(mfc::load_config(path.string()),
                        Catch::Matchers::ContainsSubstring("broken.json"));
  }
}

TEST_CASE("validation enforces ranges on the post-override values") {
  mfc::ExperimentConfig cfg;
  REQUIRE_NOTHROW(mfc::validate_config(cfg));

  SECTION("discount factor") {
    cfg.beta = 1.0;
    REQUIRE_THROWS_WITH(mfc::validate_config(cfg),
                        Catch::Matchers::ContainsSubstring("config.beta"));
  }
  SECTION("seeds must be positive, matching the stream contract") {
    cfg.root_seed = 0;
    REQUIRE_THROWS_WITH(mfc::validate_config(cfg),
                        Catch::Matchers::ContainsSubstring("config.root_seed"));
  }
  SECTION("start measure must match the model and carry unit mass") {
    cfg.mu0 = {0.5, 0.5};
    REQUIRE_THROWS_WITH(mfc::validate_config(cfg),
                        Catch::Matchers::ContainsSubstring("config.mu0"));
    cfg.mu0 = {0.5, 0.2, 0.2};
    REQUIRE_THROWS_WITH(mfc::validate_config(cfg),
                        Catch::Matchers::ContainsSubstring("config.mu0"));
    cfg.mu0 = {0.5, 0.25, 0.25};
    REQUIRE_NOTHROW(mfc::validate_config(cfg));
  }
  SECTION("the coordination example is pinned to two states and actions") {
    cfg.model.kind = "two_target";
    REQUIRE_THROWS_WITH(mfc::validate_config(cfg),
                        Catch::Matchers::ContainsSubstring("two_target"));
    cfg.model.n_states = 2;
    cfg.model.n_actions = 2;
    REQUIRE_NOTHROW(mfc::validate_config(cfg));
  }
  SECTION("learner and scenario enums are closed") {
    cfg.learner.mode = "federated";
    REQUIRE_THROWS_WITH(mfc::validate_config(cfg),
                        Catch::Matchers::ContainsSubstring("config.learner.mode"));
    cfg.learner.mode = "coordinated";
    cfg.scenarios.push_back({});
    cfg.scenarios.back().kind = "triple";
    REQUIRE_THROWS_WITH(mfc::validate_config(cfg),
                        Catch::Matchers::ContainsSubstring("config.scenarios[0].kind"));
  }
}

TEST_CASE("model specs build the galleries they name") {
  SECTION("constant kind pins one kernel row and broadcasts a scalar cost") {
    mfc::ModelSpec m;
    m.kind = "constant";
    m.n_states = 2;
    m.n_actions = 2;
    m.row = {0.3, 0.7};
    m.cost_base = {2.5};
    const mfc::GalleryModel g = mfc::build_gallery_model(m);
    const mfc::Measure probe({0.9, 0.1});
    for (int x = 0; x < 2; ++x)
      for (int u = 0; u < 2; ++u) {
        const mfc::Measure row = g.model.kernel(x, u, probe);
        REQUIRE(row[0] == Catch::Approx(0.3).margin(1e-15));
        REQUIRE(g.model.cost(x, u, probe) == 2.5);
      }
    REQUIRE(g.analytic.has_value());
    REQUIRE(g.analytic->k_f == 0.0);
  }

  SECTION("table kind evaluates the tables verbatim") {
    mfc::ModelSpec m;
    m.kind = "table";
    m.n_states = 2;
    m.n_actions = 2;
    m.cost_table = {{1.0, 2.0}, {3.0, 4.0}};
    m.kernel_table = {{{0.2, 0.8}, {0.6, 0.4}}, {{1.0, 0.0}, {0.5, 0.5}}};
    const mfc::GalleryModel g = mfc::build_gallery_model(m);
    const mfc::Measure probe({0.25, 0.75});
    REQUIRE(g.model.cost(1, 0, probe) == 3.0);
    REQUIRE(g.model.kernel(0, 1, probe)[0] == Catch::Approx(0.6).margin(1e-15));
    REQUIRE(g.model.kernel(1, 0, probe)[1] == 0.0);
    REQUIRE(g.analytic.has_value());
    REQUIRE(g.analytic->k_f == 0.0);  // population never enters the tables
    REQUIRE(g.analytic->c_sup == 4.0);

    m.kernel_table[0][0] = {0.2, 0.7};  // mass 0.9
    REQUIRE_THROWS_AS(mfc::build_gallery_model(m), mfc::ConfigError);
    m.kernel_table[0][0] = {0.2, 0.8};
    m.cost_table.pop_back();
    REQUIRE_THROWS_AS(mfc::build_gallery_model(m), mfc::ConfigError);
  }

  SECTION("seeded kinds are reproducible") {
    mfc::ModelSpec m;
    m.kind = "random";
    m.seed = 31;
    const mfc::GalleryModel a = mfc::build_gallery_model(m);
    const mfc::GalleryModel b = mfc::build_gallery_model(m);
    const mfc::Measure probe = mfc::Measure::uniform(3);
    for (int y = 0; y < 3; ++y)
      REQUIRE(a.model.kernel(1, 0, probe)[y] == b.model.kernel(1, 0, probe)[y]);
    REQUIRE(a.model.cost(2, 1, probe) == b.model.cost(2, 1, probe));
  }
}

TEST_CASE("policy specs resolve against the model dimensions") {
  mfc::PolicySpec det;
  det.kind = "deterministic";
  det.actions = {1, 0};
  const mfc::StatePolicy gamma = mfc::build_policy(det, 2, 2);
  REQUIRE(gamma.rows[0][1] == 1.0);
  REQUIRE(gamma.rows[1][0] == 1.0);

  SECTION("mixtures blend their parts by weight") {
    mfc::PolicySpec mix;
    mix.kind = "mixture";
    mix.weights = {0.25, 0.75};
    mfc::PolicySpec other = det;
    other.actions = {0, 1};
    mix.parts = {det, other};
    const mfc::StatePolicy blended = mfc::build_policy(mix, 2, 2);
    REQUIRE(blended.rows[0][1] == Catch::Approx(0.25).margin(1e-15));
    REQUIRE(blended.rows[1][1] == Catch::Approx(0.75).margin(1e-15));
  }

  SECTION("usage errors carry the policy path") {
    mfc::PolicySpec bad = det;
    bad.actions = {1, 2};
    REQUIRE_THROWS_WITH(mfc::build_policy(bad, 2, 2),
                        Catch::Matchers::ContainsSubstring("config.policy.actions"));
    mfc::PolicySpec mix;
    mix.kind = "mixture";
    mix.weights = {1.0};
    REQUIRE_THROWS_AS(mfc::build_policy(mix, 2, 2), mfc::ConfigError);
  }
}

TEST_CASE("population allocation rounds deterministically toward mu0") {
  const std::vector<int> pop = mfc::allocate_population(mfc::Measure({0.5, 0.5}), 5);
  REQUIRE(pop == std::vector<int>{0, 0, 0, 1, 1});  // remainder tie goes to state 0

  const std::vector<int> skew =
      mfc::allocate_population(mfc::Measure({1.0 / 3.0, 2.0 / 3.0}), 4);
  REQUIRE(skew == std::vector<int>{0, 1, 1, 1});

  // The empirical measure of the allocation is within one agent per state.
  const mfc::Measure mu0({0.21, 0.33, 0.46});
  for (int n : {7, 50, 333}) {
    const std::vector<int> p = mfc::allocate_population(mu0, n);
    REQUIRE(static_cast<int>(p.size()) == n);
    const mfc::Measure emp = mfc::empirical_from_states(p, 3);
    for (int i = 0; i < 3; ++i) REQUIRE(std::abs(emp[i] - mu0[i]) <= 1.0 / n + 1e-12);
  }

  REQUIRE_THROWS_AS(mfc::allocate_population(mfc::Measure({1.0}), 0), std::invalid_argument);
}

TEST_CASE("artifact serialization embeds provenance and exact decimals") {
  mfc::ExperimentConfig cfg;
  cfg.root_seed = 7;
  const mfc::ConfigJson j = mfc::io::provenance_json(cfg);
  REQUIRE(j.contains("config_hash"));
  REQUIRE(j.at("config_hash").get<std::string>().size() == 16);
  REQUIRE(j.at("root_seed").get<std::uint64_t>() == 7);

  const std::string line = mfc::io::csv_provenance(cfg);
  REQUIRE(line.rfind("# config_hash=", 0) == 0);
  REQUIRE(line.find("root_seed=7") != std::string::npos);

  // 17 significant digits survive a text round trip bit for bit.
  const double third = 1.0 / 3.0;
  REQUIRE(std::stod(mfc::io::format_g17(third)) == third);
  REQUIRE(mfc::io::format_g17(0.25) == "0.25");
}
