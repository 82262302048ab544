#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_util.hpp"
#include "toplora/serialize.hpp"

using namespace toplora;
using test::random_gaussian;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("named matrix container round-trips bit-exactly") {
    Rng rng(71);
    TempFile tmp("toplora_roundtrip.tplw");
    for (int trial = 0; trial < 10; ++trial) {
        NamedMatrices entries = {
            {"W", random_gaussian(1 + rng.index(6), 1 + rng.index(6), rng)},
            {"A", random_gaussian(2, 5, rng)},
            {"odd name \xc3\xa9", random_gaussian(1, 1, rng)},
        };
        write_weights(tmp.path, entries);
        NamedMatrices back = read_weights(tmp.path);
        REQUIRE(back.size() == entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            CHECK(back[i].first == entries[i].first);
            CHECK(bit_equal(back[i].second, entries[i].second));
        }
    }
}

TEST_CASE("adapter save/load preserves kind, weights, and config") {
    Rng rng(73);
    TempFile tmp("toplora_adapter.tplw");

    AdapterConfig cfg;
    cfg.rank = 3;
    cfg.dropout_rate = 0.0;
    cfg.use_exp = false;
    cfg.seed = 5;
    TopLoRAAdapter top = init_toplora(cfg, random_gaussian(6, 9, rng));
    top.B = random_gaussian(6, 3, rng);
    save_adapter(tmp.path, top);

    auto loaded = load_adapter(tmp.path);
    REQUIRE(std::holds_alternative<TopLoRAAdapter>(loaded));
    const TopLoRAAdapter& got = std::get<TopLoRAAdapter>(loaded);
    CHECK(bit_equal(got.W, top.W));
    CHECK(bit_equal(got.A, top.A));
    CHECK(bit_equal(got.B, top.B));
    CHECK(bit_equal(got.Theta, top.Theta));
    CHECK(got.config.rank == 3);
    CHECK(got.config.use_exp == false);
    CHECK(got.config.use_rmsnorm == true);

    LoRAAdapter plain = init_lora(cfg, top.W);
    save_adapter(tmp.path, plain);
    CHECK(std::holds_alternative<LoRAAdapter>(load_adapter(tmp.path)));
}

TEST_CASE("write-then-write produces identical bytes") {
    Rng rng(79);
    TempFile a("toplora_bytes_a.tplw");
    TempFile b("toplora_bytes_b.tplw");
    NamedMatrices entries = {{"M", random_gaussian(4, 4, rng)}};
    write_weights(a.path, entries);
    write_weights(b.path, entries);
    std::ifstream fa(a.path, std::ios::binary), fb(b.path, std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(sa.substr(0, 5) == "TPLW1");
}

TEST_CASE("malformed files report the byte offset") {
    TempFile tmp("toplora_malformed.tplw");

    SUBCASE("bad magic") {
        std::ofstream(tmp.path, std::ios::binary) << "NOPE!";
        try {
            read_weights(tmp.path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset() == 0);
        }
    }

    SUBCASE("truncated payload") {
        Rng rng(83);
        TempFile good("toplora_good.tplw");
        write_weights(good.path, {{"M", random_gaussian(3, 3, rng)}});
        std::ifstream in(good.path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream(tmp.path, std::ios::binary) << bytes.substr(0, bytes.size() - 11);
        try {
            read_weights(tmp.path);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.offset() > 5);
            CHECK(std::string(e.what()).find("byte offset") != std::string::npos);
        }
    }

    SUBCASE("truncated header") {
        std::ofstream(tmp.path, std::ios::binary) << std::string("TPLW1\x05", 6);
        CHECK_THROWS_AS(read_weights(tmp.path), FormatError);
    }
}
