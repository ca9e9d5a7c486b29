#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gradcheck.hpp"
#include "support.hpp"
#include "uwiq/mixing.hpp"
#include "uwiq/ranker.hpp"

using namespace uwiq;

namespace {

RankerConfig small_config(std::uint64_t seed) {
    RankerConfig cfg;
    cfg.conv_channels = {2, 3};
    cfg.fc_widths = {4, 3};
    cfg.seed = seed;
    return cfg;
}

// model whose score is exactly the mean of the red channel: identity conv
// taps on channel 0 and pass-through FC chain
RankerModel red_mean_model() {
    RankerConfig cfg = small_config(0);
    RankerModel m = init_model(cfg);
    for (Tensor& t : m.params) std::fill(t.v.begin(), t.v.end(), 0.0);
    const int k = cfg.kernel_size, mid = (k / 2) * k + k / 2;
    m.params[0].v[0 * 3 * k * k + 0 * k * k + mid] = 1.0;  // conv1: out0 <- in0 center
    m.params[2].v[0 * 2 * k * k + 0 * k * k + mid] = 1.0;  // conv2: out0 <- in0 center
    const int base = 4;
    m.params[base + 0].v[0] = 1.0;  // fc1 row0 reads gap[0]
    m.params[base + 2].v[0] = 1.0;  // fc2 row0 reads fc1[0]
    m.params[base + 4].v[0] = 1.0;  // out reads fc2[0]
    return m;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_NOTHROW(validate_config(RankerConfig{}));
    RankerConfig bad = small_config(0);
    bad.conv_channels.clear();
    CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
    bad = small_config(0);
    bad.kernel_size = 4;
    CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
    bad = small_config(0);
    bad.fc_widths = {4, 3, 2};
    CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
    bad = small_config(0);
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(validate_config(bad), std::invalid_argument);
}

TEST_CASE("init determinism and seeding") {
    const RankerModel a = init_model(small_config(7));
    const RankerModel b = init_model(small_config(7));
    const RankerModel c = init_model(small_config(8));
    REQUIRE(a.params.size() == b.params.size());
    bool all_equal_c = true;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        CHECK(a.params[i].v == b.params[i].v);
        if (a.params[i].v != c.params[i].v) all_equal_c = false;
    }
    CHECK_FALSE(all_equal_c);
}

TEST_CASE("parameter count equals the closed-form shape sum") {
    const RankerConfig cfg;  // defaults: conv {8,16,32}, fc {32,16}, k=3
    const RankerModel m = init_model(cfg);
    std::size_t expect = 0;
    int in = 3;
    for (int out : cfg.conv_channels) {
        expect += static_cast<std::size_t>(out) * in * 9 + out;
        in = out;
    }
    int d = cfg.conv_channels.back();
    for (int f : cfg.fc_widths) {
        expect += static_cast<std::size_t>(f) * d + f;
        d = f;
    }
    expect += d + 1;
    CHECK(m.parameter_count() == expect);
    CHECK(expect == 7633);  // hand-computed for the default shape
}

TEST_CASE("forward: zero network, bias passthrough, size freedom") {
    RankerModel zero = init_model(small_config(1));
    for (Tensor& t : zero.params) std::fill(t.v.begin(), t.v.end(), 0.0);
    Rng rng(9);
    for (auto [w, h] : std::vector<std::pair<int, int>>{{8, 8}, {16, 12}, {33, 9}}) {
        CHECK(forward(zero, testsup::random_image(rng, w, h)).value == 0.0);
    }

    RankerModel biased = zero;
    biased.params.back().v[0] = 1.75;
    CHECK(forward(biased, testsup::random_image(rng, 10, 10)).value == 1.75);

    const RankerModel m = init_model(small_config(2));
    for (auto [w, h] : std::vector<std::pair<int, int>>{{8, 8}, {64, 8}, {8, 64}, {37, 23}}) {
        CHECK(std::isfinite(forward(m, testsup::random_image(rng, w, h)).value));
    }
    CHECK_THROWS_AS(forward(m, testsup::random_image(rng, 7, 20)), std::invalid_argument);
    CHECK_THROWS_AS(forward(m, testsup::random_image(rng, 20, 7)), std::invalid_argument);
}

TEST_CASE("forward golden scalar on a fixed seed and input") {
    const RankerModel m = init_model(small_config(1234));
    Rng rng(4321);
    const ImageRGB img = testsup::random_image(rng, 16, 16);
    const double score = forward(m, img).value;
    const double golden = 0x1.dd33e8c7a42c5p-9;  // 0.0036407682089890391
    CHECK(score == golden);
}

TEST_CASE("margin_rank_loss evaluations") {
    CHECK(margin_rank_loss(0.2, 0.9, +1, 0.5) == 0.0);
    CHECK(margin_rank_loss(0.9, 0.2, +1, 0.5) == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(margin_rank_loss(0.4, 0.4, +1, 0.5) == 0.5);
    CHECK(margin_rank_loss(0.4, 0.4, -1, 0.5) == 0.5);
    CHECK_THROWS_AS(margin_rank_loss(0, 0, 0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(margin_rank_loss(0, 0, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(margin_rank_loss(0, 0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("loss symmetry and exact-zero region") {
    Rng rng(10);
    for (int i = 0; i < 300; ++i) {
        const double s1 = rng.uniform(-2, 2), s2 = rng.uniform(-2, 2);
        const int gamma = rng.uniform() < 0.5 ? +1 : -1;
        const double eps = rng.uniform(0.01, 1.0);
        const double l = margin_rank_loss(s1, s2, gamma, eps);
        CHECK(l == margin_rank_loss(s2, s1, -gamma, eps));
        CHECK(l >= 0.0);
        CHECK((l == 0.0) == ((s1 - s2) * gamma <= -eps));
    }
}

TEST_CASE("backward: inactive hinge yields all-zero gradients") {
    const RankerModel m = red_mean_model();
    RankedPair pair;
    pair.x1 = testsup::constant_image(8, 8, 0.9, 0.3, 0.3);
    pair.x2 = testsup::constant_image(8, 8, 0.1, 0.3, 0.3);
    pair.gamma = -1;  // x1 ranked higher and scored 0.8 above: hinge inactive
    double loss = 1.0;
    const auto grads = backward(m, pair, 0.5, &loss);
    CHECK(loss == 0.0);
    for (const Tensor& g : grads) {
        for (double v : g.v) CHECK(v == 0.0);
    }
}

TEST_CASE("backward: shared output bias cancels between branches") {
    const RankerModel m = init_model(small_config(3));
    Rng rng(11);
    RatioSampler sampler(12);
    const ImageRGB hq = testsup::random_image(rng, 10, 10);
    const ImageRGB lq = testsup::random_image(rng, 10, 10);
    const RankedPair pair = make_ranked_pair(hq, lq, sampler.sample());
    double loss = 0.0;
    const auto grads = backward(m, pair, 0.5, &loss);
    CHECK(loss > 0.0);  // near-zero readout init keeps the hinge active
    CHECK(grads.back().v[0] == 0.0);
}

TEST_CASE("gradients match central finite differences on small configs") {
    Rng rng(13);
    int done = 0;
    std::uint64_t draw = 0;
    while (done < 5) {
        RankerConfig cfg = small_config(100 + draw);
        RankerModel m = init_model(cfg);
        // healthy readout and biases so every layer sees usable gradients
        for (double& v : m.params[m.params.size() - 2].v) v *= 100.0;
        for (std::size_t t = 1; t < m.params.size(); t += 2) {
            for (double& v : m.params[t].v) v += rng.uniform(-0.1, 0.1);
        }
        const ImageRGB hq = testsup::random_image(rng, 9, 9);
        const ImageRGB lq = testsup::random_image(rng, 9, 9);
        RatioSampler sampler(200 + draw);
        const RankedPair pair = make_ranked_pair(hq, lq, sampler.sample());
        ++draw;
        if (gradcheck::kink_distance(m, pair, 0.5) < 1e-3) continue;

        const auto r = gradcheck::finite_difference_check(m, pair, 0.5);
        CHECK(r.max_rel_err < 1e-4);
        CHECK(r.checked == m.parameter_count());
        ++done;
    }
}

TEST_CASE("gradients also match on a single-block config (no pooling path)") {
    Rng rng(28);
    std::uint64_t draw = 0;
    while (true) {
        RankerConfig cfg;
        cfg.conv_channels = {3};
        cfg.fc_widths = {4, 3};
        cfg.seed = 300 + draw;
        RankerModel m = init_model(cfg);
        for (double& v : m.params[m.params.size() - 2].v) v *= 100.0;
        for (std::size_t t = 1; t < m.params.size(); t += 2) {
            for (double& v : m.params[t].v) v += rng.uniform(-0.1, 0.1);
        }
        const ImageRGB hq = testsup::random_image(rng, 8, 8);
        const ImageRGB lq = testsup::random_image(rng, 8, 8);
        RatioSampler sampler(400 + draw);
        const RankedPair pair = make_ranked_pair(hq, lq, sampler.sample());
        ++draw;
        if (gradcheck::kink_distance(m, pair, 0.5) < 1e-3) continue;
        const auto r = gradcheck::finite_difference_check(m, pair, 0.5);
        CHECK(r.max_rel_err < 1e-4);
        break;
    }
}

TEST_CASE("adam: zero gradients leave weights unchanged") {
    RankerModel m = init_model(small_config(4));
    const RankerModel before = m;
    AdamState st = make_adam_state(m);
    std::vector<Tensor> zeros;
    for (const Tensor& p : m.params) zeros.emplace_back(p.shape);
    adam_step(m, zeros, st, 0.1);
    CHECK(st.t == 1);
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        CHECK(m.params[i].v == before.params[i].v);
    }
}

TEST_CASE("adam: constant gradient drives unit-lr steps") {
    RankerConfig cfg = small_config(5);
    RankerModel m = init_model(cfg);
    AdamState st = make_adam_state(m);
    std::vector<Tensor> g;
    for (const Tensor& p : m.params) {
        g.emplace_back(p.shape);
        std::fill(g.back().v.begin(), g.back().v.end(), 0.25);
    }
    const double lr = 0.01;
    double prev = m.params[0].v[0];
    for (int i = 0; i < 50; ++i) {
        adam_step(m, g, st, lr);
        const double step = prev - m.params[0].v[0];
        prev = m.params[0].v[0];
        if (i > 10) CHECK(step == doctest::Approx(lr).epsilon(1e-6));
    }
    CHECK(st.t == 50);
    for (const Tensor& v : st.v) {
        for (double x : v.v) CHECK(x >= 0.0);
    }
}

TEST_CASE("adam single step matches the hand-computed update") {
    RankerConfig cfg = small_config(6);
    RankerModel m = init_model(cfg);
    const double theta0 = m.params[0].v[0];
    AdamState st = make_adam_state(m);
    std::vector<Tensor> g;
    for (const Tensor& p : m.params) g.emplace_back(p.shape);
    g[0].v[0] = 0.5;

    adam_step(m, g, st, 0.1);

    const double mhat = (0.1 * 0.5) / (1.0 - 0.9);
    const double vhat = (0.001 * 0.25) / (1.0 - 0.999);
    const double expect = theta0 - 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(m.params[0].v[0] == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("a small gradient step on an active pair decreases its loss") {
    Rng rng(14);
    RankerModel m = init_model(small_config(15));
    for (double& v : m.params[m.params.size() - 2].v) v *= 100.0;
    RatioSampler sampler(16);
    const ImageRGB hq = testsup::random_image(rng, 10, 10);
    const ImageRGB lq = testsup::random_image(rng, 10, 10);
    const RankedPair pair = make_ranked_pair(hq, lq, sampler.sample());
    double loss0 = 0.0;
    const auto grads = backward(m, pair, 0.5, &loss0);
    REQUIRE(loss0 > 0.0);
    double gmax = 0.0;
    for (const Tensor& g : grads) {
        for (double v : g.v) gmax = std::max(gmax, std::abs(v));
    }
    REQUIRE(gmax > 0.0);
    const double alpha = 1e-3 / gmax;
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        for (std::size_t j = 0; j < m.params[i].size(); ++j) {
            m.params[i].v[j] -= alpha * grads[i].v[j];
        }
    }
    CHECK(gradcheck::pair_loss(m, pair, 0.5) < loss0);
}

TEST_CASE("train: zero learning rate is a no-op on the weights") {
    Rng rng(17);
    std::vector<TrainSample> data;
    for (int i = 0; i < 3; ++i) {
        data.push_back({"s" + std::to_string(i), testsup::random_image(rng, 12, 12),
                        testsup::random_image(rng, 12, 12)});
    }
    RankerConfig cfg = small_config(18);
    cfg.epochs = 2;
    cfg.learning_rate = 0.0;
    RankerModel m = init_model(cfg);
    const RankerModel before = m;
    const TrainLog log = train(m, data, cfg);
    CHECK(log.epoch_mean_loss.size() == 2);
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        CHECK(m.params[i].v == before.params[i].v);
    }
}

TEST_CASE("train: deterministic given the seed") {
    Rng rng(19);
    std::vector<TrainSample> data;
    for (int i = 0; i < 4; ++i) {
        data.push_back({"s" + std::to_string(i), testsup::random_image(rng, 12, 12),
                        testsup::random_image(rng, 12, 12)});
    }
    RankerConfig cfg = small_config(20);
    cfg.epochs = 2;
    cfg.learning_rate = 1e-4;

    RankerModel m1 = init_model(cfg);
    RankerModel m2 = init_model(cfg);
    const TrainLog l1 = train(m1, data, cfg);
    const TrainLog l2 = train(m2, data, cfg);
    CHECK(l1.epoch_mean_loss == l2.epoch_mean_loss);
    for (std::size_t i = 0; i < m1.params.size(); ++i) {
        CHECK(m1.params[i].v == m2.params[i].v);
    }

    CHECK_THROWS_AS(train(m1, {}, cfg), std::invalid_argument);
}

TEST_CASE("train: epochs 0 returns the initial model") {
    Rng rng(21);
    std::vector<TrainSample> data{
        {"s", testsup::random_image(rng, 12, 12), testsup::random_image(rng, 12, 12)}};
    RankerConfig cfg = small_config(22);
    cfg.epochs = 0;
    RankerModel m = init_model(cfg);
    const RankerModel before = m;
    const TrainLog log = train(m, data, cfg);
    CHECK(log.epoch_mean_loss.empty());
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        CHECK(m.params[i].v == before.params[i].v);
    }
}

TEST_CASE("train separates a toy quality axis (held-out ordering accuracy)") {
    testsup::ToyParams params;
    params.width = 32;
    params.height = 32;
    std::vector<TrainSample> data;
    for (int i = 0; i < 200; ++i) {
        const testsup::ToySource src = testsup::make_toy_source(1000 + i, params);
        data.push_back({src.id, src.hq, src.lq});
    }
    RankerConfig cfg;  // default architecture
    cfg.epochs = 20;
    cfg.learning_rate = 1e-6;
    cfg.seed = 99;
    RankerModel m = init_model(cfg);
    train(m, data, cfg);

    RatioSampler sampler(555);
    int correct = 0, total = 0;
    for (int i = 0; i < 50; ++i) {
        const testsup::ToySource src = testsup::make_toy_source(90000 + i, params);
        for (int rep = 0; rep < 4; ++rep) {
            const MixRatioPair r = sampler.sample();
            const RankedPair pair = make_ranked_pair(src.hq, src.lq, r);
            const double s1 = forward(m, pair.x1).value;
            const double s2 = forward(m, pair.x2).value;
            if ((s2 - s1) * pair.gamma > 0.0) ++correct;
            ++total;
        }
    }
    const double accuracy = static_cast<double>(correct) / total;
    MESSAGE("held-out pairwise ordering accuracy: " << accuracy);
    CHECK(accuracy >= 0.9);
}

TEST_CASE("save/load round trip preserves forward outputs exactly") {
    testsup::TempDir tmp("model");
    const RankerModel m = init_model(small_config(23));
    const std::string path = tmp.file("m.json");
    save_model(m, path);
    const RankerModel back = load_model(path);
    CHECK(back.version == m.version);
    REQUIRE(back.params.size() == m.params.size());
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        CHECK(back.params[i].v == m.params[i].v);
        CHECK(back.params[i].shape == m.params[i].shape);
    }
    Rng rng(24);
    const ImageRGB img = testsup::random_image(rng, 14, 11);
    CHECK(forward(back, img).value == forward(m, img).value);
}

TEST_CASE("load_model: version and corruption errors") {
    testsup::TempDir tmp("modelerr");
    const RankerModel m = init_model(small_config(25));
    const std::string path = tmp.file("m.json");
    save_model(m, path);

    // wrong version
    {
        std::ifstream in(path);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        const auto pos = text.find("\"version\": 1");
        REQUIRE(pos != std::string::npos);
        text.replace(pos, 12, "\"version\": 9");
        std::ofstream out(tmp.file("v9.json"));
        out << text;
    }
    try {
        load_model(tmp.file("v9.json"));
        FAIL("expected version error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }

    CHECK_THROWS_AS(load_model(tmp.file("missing.json")), std::runtime_error);
}

TEST_CASE("load_model: truncation fuzz never yields a partial model") {
    testsup::TempDir tmp("trunc");
    const RankerModel m = init_model(small_config(26));
    const std::string path = tmp.file("m.json");
    save_model(m, path);
    std::ifstream in(path);
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    Rng rng(27);
    for (int i = 0; i < 40; ++i) {
        const std::size_t cut = rng.index(text.size());
        const std::string p = tmp.file("cut.json");
        {
            std::ofstream f(p);
            f << text.substr(0, cut);
        }
        CHECK_THROWS_AS(load_model(p), std::runtime_error);
    }
}
