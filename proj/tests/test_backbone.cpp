#include <doctest.h>

#include <cmath>
#include <fstream>

#include "tsrag/backbone.hpp"
#include "tsrag/error.hpp"
#include "tsrag/motif.hpp"
#include "tsrag/rng.hpp"

using namespace tsrag;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_raw(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
}

BackboneConfig small_config() {
    BackboneConfig c;
    c.context_len = 64;
    c.horizon_len = 16;
    c.patch_len = 16;
    c.embed_dim = 8;
    c.seed = 3;
    return c;
}

Vec random_vec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Vec v(n);
    for (auto& x : v) x = rng.gaussian();
    return v;
}

std::vector<TimeSeriesPair> motif_pairs(const BackboneConfig& cfg, std::size_t n_series,
                                        double noise, std::uint64_t seed) {
    const auto corpus =
        generate_motif_corpus(seed, n_series, cfg.context_len + cfg.horizon_len + 256, 3, noise);
    std::vector<TimeSeriesPair> pairs;
    for (const auto& s : corpus) {
        for (auto& p : make_pairs(s, cfg.context_len, cfg.horizon_len, 32)) {
            pairs.push_back(std::move(p));
        }
    }
    return pairs;
}

} // namespace

TEST_CASE("config invariants") {
    BackboneConfig c = small_config();
    c.patch_len = 48; // 64 % 48 != 0
    CHECK_THROWS_AS(c.validate(), TsragError);
    c = small_config();
    c.embed_dim = 4;
    CHECK_THROWS_AS(c.validate(), TsragError);
}

TEST_CASE("encode: zero context with zero bias gives the zero embedding") {
    const auto cfg = small_config();
    const auto p = init_backbone(cfg); // biases start at zero
    const Vec e = encode(Vec(cfg.context_len, 0.0), p);
    for (double v : e) CHECK(v == 0.0);
}

TEST_CASE("encode is deterministic and tanh-bounded") {
    const auto cfg = small_config();
    const auto p = init_backbone(cfg);
    const Vec x = random_vec(cfg.context_len, 11);
    const Vec a = encode(x, p);
    const Vec b = encode(x, p);
    CHECK(a == b);
    for (double v : a) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(encode(Vec(10, 0.0), p), TsragError);
}

TEST_CASE("encode is invariant under patch permutation") {
    const auto cfg = small_config();
    const auto p = init_backbone(cfg);
    const Vec x = random_vec(cfg.context_len, 21);
    // rotate whole patches: move the first patch to the back
    Vec permuted(x.begin() + cfg.patch_len, x.end());
    permuted.insert(permuted.end(), x.begin(), x.begin() + cfg.patch_len);
    const Vec ea = encode(x, p);
    const Vec eb = encode(permuted, p);
    for (std::size_t i = 0; i < ea.size(); ++i) {
        CHECK(ea[i] == doctest::Approx(eb[i]).epsilon(1e-12));
    }
}

TEST_CASE("project is affine") {
    const auto cfg = small_config();
    auto p = init_backbone(cfg);
    // zero embedding -> bias vector
    Vec bias_probe = project(Vec(cfg.embed_dim, 0.0), p);
    CHECK(bias_probe == p.proj_bias);

    // with zero bias, project(2e) = 2 * project(e)
    const Vec e = random_vec(cfg.embed_dim, 31);
    Vec e2 = e;
    for (double& v : e2) v *= 2.0;
    const Vec y1 = project(e, p);
    const Vec y2 = project(e2, p);
    for (std::size_t i = 0; i < y1.size(); ++i) {
        CHECK(y2[i] == doctest::Approx(2.0 * y1[i]).epsilon(1e-12));
    }
}

TEST_CASE("projection-head gradient matches central differences") {
    const auto cfg = small_config();
    auto p = init_backbone(cfg);
    const Vec e = random_vec(cfg.embed_dim, 41);
    const Vec r = random_vec(cfg.horizon_len, 42); // random linear functional

    // loss = r . project(e); dL/dW(i,j) = e[i] * r[j]
    const double h = 1e-6;
    double worst_rel = 0.0;
    for (std::size_t i = 0; i < cfg.embed_dim; ++i) {
        for (std::size_t j = 0; j < cfg.horizon_len; ++j) {
            const double keep = p.proj_head(i, j);
            p.proj_head(i, j) = keep + h;
            const double up = dot(r, project(e, p));
            p.proj_head(i, j) = keep - h;
            const double dn = dot(r, project(e, p));
            p.proj_head(i, j) = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double analytic = e[i] * r[j];
            const double rel = std::abs(fd - analytic) /
                               std::max({std::abs(fd), std::abs(analytic), 1e-8});
            worst_rel = std::max(worst_rel, rel);
        }
    }
    CHECK(worst_rel < 1e-6);
}

TEST_CASE("pretraining reduces loss monotonically on a noiseless corpus") {
    BackboneConfig cfg = small_config();
    const auto pairs = motif_pairs(cfg, 4, 0.0, 17);
    REQUIRE(pairs.size() > 10);

    PretrainOptions opts;
    opts.epochs = 10;
    opts.lr = 2e-3;
    opts.batch_size = 0; // full batch
    const auto res = pretrain_backbone(pairs, cfg, opts);

    REQUIRE(res.loss_curve.size() == 10);
    for (std::size_t i = 1; i < res.loss_curve.size(); ++i) {
        CHECK(res.loss_curve[i] < res.loss_curve[i - 1]);
    }
    CHECK(res.params.frozen);

    SUBCASE("same seed and corpus give identical parameters") {
        const auto res2 = pretrain_backbone(pairs, cfg, opts);
        CHECK(serialize_backbone(res.params) == serialize_backbone(res2.params));
    }
}

TEST_CASE("pretrain rejects an empty corpus") {
    CHECK_THROWS_AS(pretrain_backbone({}, small_config(), PretrainOptions{}), TsragError);
}

TEST_CASE("backbone checkpoint round-trip and corruption") {
    const auto cfg = small_config();
    auto res = pretrain_backbone(motif_pairs(cfg, 2, 0.1, 5), cfg, {3, 1e-3, 0.0, 0});
    const std::string path = "/tmp/tsrag_backbone_test.ckpt";
    save_backbone(res.params, path);
    const auto loaded = load_backbone(path);
    CHECK(serialize_backbone(loaded) == serialize_backbone(res.params));

    // save -> load -> save produces identical bytes
    const std::string path2 = path + ".again";
    save_backbone(loaded, path2);
    CHECK(read_file(path) == read_file(path2));

    SUBCASE("wrong magic") {
        auto bytes = read_file(path);
        bytes[0] = 'X';
        write_raw(path + ".magic", bytes);
        try {
            load_backbone(path + ".magic");
            FAIL("expected");
        } catch (const TsragError& e) {
            CHECK(e.category() == ErrorCategory::FORMAT);
        }
    }

    SUBCASE("truncation") {
        auto bytes = read_file(path);
        bytes.resize(bytes.size() - 9);
        write_raw(path + ".trunc", bytes);
        CHECK_THROWS_AS(load_backbone(path + ".trunc"), TsragError);
    }

    SUBCASE("dim mismatch against runtime config names both dims") {
        BackboneConfig other = cfg;
        other.embed_dim = 16;
        try {
            load_backbone(path, other);
            FAIL("expected");
        } catch (const TsragError& e) {
            CHECK(e.category() == ErrorCategory::DIM_MISMATCH);
            const std::string msg = e.what();
            CHECK(msg.find("8") != std::string::npos);
            CHECK(msg.find("16") != std::string::npos);
        }
    }
}
