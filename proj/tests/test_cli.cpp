#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "test_util.hpp"
#include "toplora/commands.hpp"
#include "toplora/serialize.hpp"

using namespace toplora;
using namespace toplora::cli;
using nlohmann::json;
using test::random_gaussian;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

json small_train_config() {
    return json::parse(R"({
        "task": {"n": 16, "m": 16, "r_teacher": 2, "vocab": 4,
                 "samples_train": 256, "samples_eval": 128, "seed": 3},
        "adapter": {"rank": 2},
        "steps": 40,
        "batch_size": 8,
        "lr": 0.01,
        "seeds": [1, 2]
    })");
}

}  // namespace

TEST_CASE("command_section enforces known top-level keys") {
    json doc = {{"params", {{"m", 1}, {"n", 1}, {"r", 1}, {"modules", 1}}}};
    CHECK(command_section(doc, "params").contains("m"));
    CHECK_THROWS_AS(command_section(doc, "train"), ConfigError);
    doc["bogus"] = 1;
    CHECK_THROWS_AS(command_section(doc, "params"), ConfigError);
}

TEST_CASE("params command reproduces published counts") {
    json config = {{"m", 768}, {"n", 768}, {"r", 8}, {"modules", 24}};
    CommandResult res = run_params(config);
    CHECK(res.exit_code == 0);
    CHECK(res.report["results"]["lora_params"] == 294912);
    CHECK(res.report["results"]["toplora_params"] == 442368);
    CHECK(res.report["results"]["toplora_over_lora_ratio"].get<double>() ==
          doctest::Approx(1.5));

    json with_kind = config;
    with_kind["kind"] = "lora";
    CHECK(run_params(with_kind).report["results"]["params"] == 294912);

    json minimal = {{"m", 1}, {"n", 1}, {"r", 1}, {"modules", 1}, {"kind", "lora"}};
    CHECK(run_params(minimal).report["results"]["params"] == 2);
}

TEST_CASE("strict parsing rejects unknown keys and bad types") {
    CHECK_THROWS_AS(run_params(json{{"m", 1}, {"n", 1}, {"r", 1}, {"wat", 1}}), ConfigError);
    CHECK_THROWS_AS(run_params(json{{"m", "one"}, {"n", 1}, {"r", 1}}), ConfigError);
    json bad_train = small_train_config();
    bad_train["task"]["typo"] = true;
    CHECK_THROWS_AS(run_train(bad_train), ConfigError);
    json dup_seeds = small_train_config();
    dup_seeds["seeds"] = {1, 1};
    CHECK_THROWS_AS(run_train(dup_seeds), ConfigError);
}

TEST_CASE("gradcheck command") {
    json config = {{"seeds", {1, 2}}};

    SUBCASE("default geometry passes at 1e-6") {
        CommandResult res = run_gradcheck(config);
        CHECK(res.exit_code == 0);
        CHECK(res.report["results"]["pass"] == true);
        CHECK(res.report["results"]["max_rel_err"].get<double>() <= 1e-6);
        // 4 variants x 2 seeds
        CHECK(res.report["results"]["cases"].size() == 8);
    }

    SUBCASE("corrupted gradients are detected") {
        json bad = config;
        bad["corrupt_gradient"] = true;
        CommandResult res = run_gradcheck(bad);
        CHECK(res.exit_code != 0);
        CHECK(res.report["results"]["pass"] == false);
    }

    SUBCASE("results payload is byte-identical across runs") {
        json r1 = run_gradcheck(config).report["results"];
        json r2 = run_gradcheck(config).report["results"];
        CHECK(r1.dump() == r2.dump());
    }
}

TEST_CASE("analyze command") {
    SUBCASE("freshly initialized adapter has a rank-zero update") {
        json config = {{"m", 8}, {"n", 12}, {"r", 2}, {"seed", 1}};
        CommandResult res = run_analyze(config);
        CHECK(res.report["results"]["delta_w_rank"] == 0);
        // B = 0 cannot be QR-factored; the projection block is absent.
        CHECK(res.report["results"]["projection"].is_null());
    }

    SUBCASE("random adapter satisfies the reconstruction identities") {
        json config = {{"m", 8}, {"n", 12}, {"r", 2}, {"seed", 1}, {"random_b", true}};
        CommandResult res = run_analyze(config);
        const json& proj = res.report["results"]["projection"];
        CHECK(proj["reconstruction_residual_rel"].get<double>() <= 1e-10);
        CHECK(proj["path_identity_error_rel"].get<double>() <= 1e-10);
        CHECK(res.report["results"]["delta_w_rank"] == 2);
    }

    SUBCASE("zero-Theta weights report zero gate dispersion") {
        Rng rng(5);
        AdapterConfig cfg;
        cfg.rank = 2;
        cfg.seed = 9;
        TopLoRAAdapter adapter = init_toplora(cfg, random_gaussian(6, 10, rng));
        adapter.B = random_gaussian(6, 2, rng);
        adapter.Theta = Matrix(2, 10);
        TempFile tmp("toplora_cli_zero_theta.tplw");
        save_adapter(tmp.path, adapter);
        CommandResult res = run_analyze(json::object(), tmp.path);
        for (const json& v : res.report["results"]["dispersion"]["std_log_sigma"]) {
            CHECK(v.get<double>() == 0.0);
        }
        CHECK(res.report["results"]["dispersion"]["max_abs_dev_from_one"] == 0.0);
    }
}

TEST_CASE("train command") {
    json config = small_train_config();

    SUBCASE("lr = 0 yields a flat loss trace") {
        json flat = config;
        flat["lr"] = 0.0;
        flat["seeds"] = {1};
        flat["kinds"] = {"lora"};
        flat["record_every"] = 1;
        CommandResult res = run_train(flat);
        const json& trace = res.report["results"]["runs"][0]["loss_trace"];
        REQUIRE(trace.size() >= 2);
        // B stays 0, so eval-path loss is unchanged from the initial loss
        CHECK(res.report["results"]["runs"][0]["final_eval_loss"] ==
              res.report["results"]["runs"][0]["initial_eval_loss"]);
    }

    SUBCASE("payload is reproducible byte-for-byte") {
        json r1 = run_train(config).report["results"];
        json r2 = run_train(config).report["results"];
        CHECK(r1.dump() == r2.dump());
    }

    SUBCASE("summary holds per-kind medians") {
        CommandResult res = run_train(config);
        const json& summary = res.report["results"]["summary"];
        CHECK(summary.contains("lora_median_final_eval_loss"));
        CHECK(summary.contains("toplora_median_final_eval_loss"));
    }
}

TEST_CASE("sweep command") {
    json config = small_train_config();
    config["ranks"] = {2};
    config.erase("adapter");

    SUBCASE("a single-rank sweep matches the train command") {
        CommandResult sweep = run_sweep(config);
        CommandResult trained = run_train(small_train_config());
        CHECK(sweep.report["results"]["table"][0]["summary"].dump() ==
              trained.report["results"]["summary"].dump());
    }

    SUBCASE("missing ranks is an error") {
        json bad = config;
        bad.erase("ranks");
        CHECK_THROWS_AS(run_sweep(bad), ConfigError);
    }
}
