#include <doctest.h>

#include <cmath>

#include "semcomm/codec/codec.h"
#include "semcomm/codec/trainer.h"
#include "semcomm/core/errors.h"
#include "semcomm/nn/grad_check.h"
#include "test_helpers.h"

using namespace semcomm;
using namespace semcomm::codec;
using testing::random_tensor;

namespace {

CodecConfig small_config(TransmissionMode mode)
{
    CodecConfig c;
    c.height = 16;
    c.width = 32;
    c.channel_plan = {3, 4, 6, 6, 5};
    c.codebook_size = 8;
    c.channel_dim = 4;
    c.mode = mode;
    return c;
}

Codebook make_codebook(std::size_t k, std::size_t d, Rng& rng)
{
    Codebook cb;
    cb.embeddings = random_tensor({k, d}, rng);
    cb.usage = Tensor({k});
    return cb;
}

}  // namespace

TEST_CASE("config geometry and validation")
{
    CodecConfig c;
    CHECK(c.grid_h() == 2);
    CHECK(c.cells() == 4);
    CHECK(c.index_bits() == 9);
    c.height = 480;
    c.width = 640;
    CHECK(c.grid_h() == 30);
    CHECK(c.grid_w() == 40);
    CHECK(c.cells() == 1200);
    c.validate();

    CodecConfig bad;
    bad.height = 30;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = CodecConfig{};
    bad.codebook_size = 1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = CodecConfig{};
    bad.commitment = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    CodecConfig j = small_config(TransmissionMode::digital);
    j.attention = false;
    CHECK(config_from_json(to_json(j)) == j);
    CHECK(parse_mode("analog") == TransmissionMode::analog);
    CHECK_THROWS_AS(parse_mode("qam"), ConfigError);
}

TEST_CASE("encode produces one index per latent cell and is deterministic")
{
    CodecConfig c;
    c.mode = TransmissionMode::digital;
    auto model = CodecModel::create(c, 5);
    model.seed_running_stats();
    Rng rng(1);
    const auto img = testing::random_image(32, 32, rng);
    const auto a = encode(img, 10.0, model);
    const auto b = encode(img, 10.0, model);
    CHECK(a.payload.indices.size() == 4);
    CHECK(a.payload.grid_h == 2);
    CHECK(a.payload == b.payload);
    for (auto idx : a.payload.indices) CHECK(idx < 512);

    CHECK_THROWS_AS(encode(testing::random_image(16, 32, rng), 10.0, model), ConfigError);
}

TEST_CASE("a 640x480 frame maps to a 40x30 grid")
{
    CodecConfig c;
    c.height = 480;
    c.width = 640;
    c.channel_plan = {3, 2, 2, 2, 4};
    c.codebook_size = 16;
    c.mode = TransmissionMode::digital;
    auto model = CodecModel::create(c, 2);
    model.seed_running_stats();
    Rng rng(2);
    const auto r = encode(testing::random_image(480, 640, rng), 0.0, model);
    CHECK(r.payload.grid_w == 40);
    CHECK(r.payload.grid_h == 30);
    CHECK(r.payload.indices.size() == 1200);
}

TEST_CASE("attention gate")
{
    Rng rng(3);
    const Tensor z = random_tensor({1, 4, 2, 3}, rng);
    auto fc = LayerParams::dense(1, 4);
    const Tensor half = attention_gate(z, 13.0, fc, 20.0);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(half[i] == 0.5 * z[i]);

    testing::randomize(fc.weight, rng, -3.0, 3.0);
    testing::randomize(fc.bias, rng, -3.0, 3.0);
    CHECK(attention_gate(Tensor({1, 4, 2, 3}), 7.0, fc, 20.0) == Tensor({1, 4, 2, 3}));

    const Tensor gated = attention_gate(z, 10.0, fc, 20.0);
    for (std::size_t c = 0; c < 4; ++c) {
        const double w = 1.0 / (1.0 + std::exp(-(fc.weight[c] * 0.5 + fc.bias[c])));
        CHECK(w > 0.0);
        CHECK(w < 1.0);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(gated.at(0, c, i, j) - w * z.at(0, c, i, j)) <= 1e-12);
    }

    Tensor scaled = z;
    for (auto& v : scaled.values()) v *= 2.5;
    const Tensor gs = attention_gate(scaled, 10.0, fc, 20.0);
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(gs[i] - 2.5 * gated[i]) <= 1e-12);

    CHECK_THROWS_AS(attention_gate(Tensor({1, 3, 2, 2}), 1.0, fc, 20.0), ConfigError);
}

TEST_CASE("quantize picks the nearest codeword")
{
    Codebook cb;
    cb.embeddings = Tensor({2, 2}, std::vector<double>{0.0, 0.0, 1.0, 1.0});
    cb.usage = Tensor({2});
    const std::vector<double> near0{0.2, 0.1};
    const std::vector<double> tie{0.5, 0.5};
    CHECK(nearest_codeword(near0, cb) == 0);
    CHECK(nearest_codeword(tie, cb) == 0);

    Rng rng(4);
    const auto book = make_codebook(16, 8, rng);
    const Tensor z = random_tensor({1, 8, 10, 10}, rng);
    const auto q = quantize(z, book);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j) {
            std::vector<double> cell(8);
            for (std::size_t c = 0; c < 8; ++c) cell[c] = z.at(0, c, i, j);
            const auto want = testing::brute_force_nearest(cell, book.embeddings);
            CHECK(q.indices[i * 10 + j] == want);
            for (std::size_t c = 0; c < 8; ++c) CHECK(q.z_q.at(0, c, i, j) == book.embeddings[want * 8 + c]);
        }
}

TEST_CASE("quantize agrees with brute force on random books with planted ties")
{
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + rng.below(63), d = 1 + rng.below(8);
        auto book = make_codebook(k, d, rng);
        // duplicate a row so exact ties occur
        const std::size_t src = rng.below(k), dst = rng.below(k);
        for (std::size_t c = 0; c < d; ++c) book.embeddings[dst * d + c] = book.embeddings[src * d + c];
        std::vector<double> v(d);
        for (auto& x : v) x = rng.uniform(-1.0, 1.0);
        if (trial % 2 == 0) v.assign(book.row(src).begin(), book.row(src).end());
        CHECK(nearest_codeword(v, book) == testing::brute_force_nearest(v, book.embeddings));
    }
}

TEST_CASE("quantize is invariant to a common positive scale")
{
    Rng rng(6);
    auto book = make_codebook(32, 4, rng);
    const Tensor z = random_tensor({2, 4, 3, 3}, rng);
    const auto base = quantize(z, book).indices;
    auto scaled_book = book;
    Tensor scaled_z = z;
    for (auto& v : scaled_book.embeddings.values()) v *= 4.0;
    for (auto& v : scaled_z.values()) v *= 4.0;
    CHECK(quantize(scaled_z, scaled_book).indices == base);
}

TEST_CASE("digital lookup and range checks")
{
    Codebook cb;
    cb.embeddings = Tensor({2, 3}, std::vector<double>{1.0, 2.0, 3.0, -1.0, -2.0, -3.0});
    cb.usage = Tensor({2});
    const std::vector<std::uint32_t> idx{0, 0, 1, 1};
    const Tensor z = lookup(idx, 1, 2, 2, cb);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(z.at(0, c, 0, 0) == cb.embeddings[c]);
        CHECK(z.at(0, c, 0, 1) == cb.embeddings[c]);
        CHECK(z.at(0, c, 1, 0) == cb.embeddings[3 + c]);
        CHECK(z.at(0, c, 1, 1) == cb.embeddings[3 + c]);
    }
    const std::vector<std::uint32_t> bad{0, 2, 0, 0};
    CHECK_THROWS_AS(lookup(bad, 1, 2, 2, cb), ProtocolError);

    auto model = CodecModel::create(small_config(TransmissionMode::digital), 1);
    SemanticPayload p;
    p.mode = TransmissionMode::digital;
    p.grid_h = 1;
    p.grid_w = 2;
    p.indices = {3, 8};
    CHECK_THROWS_AS(channel_decode(p, model), ProtocolError);
}

TEST_CASE("channel encoder normalizes and identity coder is a fixed point")
{
    Rng rng(7);
    auto model = CodecModel::create(small_config(TransmissionMode::analog), 3);
    const Tensor z = random_tensor({1, 5, 1, 2}, rng);
    const auto x = channel_encode(z, model.channel_enc);
    CHECK(x.symbols.size() == 8);
    CHECK(std::abs(channel::average_power(x.symbols) - 1.0) <= 1e-9);
    CHECK_THROWS_WITH_AS(channel_encode(Tensor({1, 5, 1, 2}), model.channel_enc),
                         doctest::Contains("zero-power signal cannot be normalized"), NumericError);

    // identity 1x1 conv with D == Dc on a unit-power latent leaves it unchanged
    CodecConfig c = small_config(TransmissionMode::analog);
    c.channel_dim = 5;
    auto square = CodecModel::create(c, 3);
    Tensor unit = random_tensor({1, 5, 1, 2}, rng);
    const auto norm = channel::power_normalize(unit.values());
    unit.values() = norm.symbols;
    const auto y = channel_encode(unit, square.channel_enc);
    for (std::size_t cell = 0; cell < 2; ++cell)
        for (std::size_t ch = 0; ch < 5; ++ch)
            CHECK(std::abs(y.symbols[cell * 5 + ch] - unit.at(0, ch, 0, cell)) <= 1e-12);
}

TEST_CASE("analog round trip recovers transmitted codewords")
{
    auto model = CodecModel::create(small_config(TransmissionMode::analog), 9);
    Rng rng(8);
    const std::vector<std::uint32_t> idx{0, 5, 7, 2, 2, 6};
    const Tensor zq = lookup(idx, 1, 2, 3, model.codebook);
    const auto x = channel_encode(zq, model.channel_enc);
    const Tensor clean = channel_decode(x, 2, 3, model.channel_dec, model.codebook);
    CHECK(clean == zq);

    // smallest codeword gap in symbol units bounds the tolerable noise
    const std::size_t k = model.codebook.size();
    double min_gap = 1e300;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < model.codebook.dim(); ++c)
                d2 += std::pow(model.codebook.row(a)[c] - model.codebook.row(b)[c], 2);
            min_gap = std::min(min_gap, std::sqrt(d2));
        }
    const double gap_symbols = min_gap / x.scale;
    // keep every coordinate's noise far below half the gap: |n| <= 6 sigma
    const double sigma = gap_symbols / (2.0 * 6.0 * std::sqrt(double(model.codebook.dim())));
    const double snr_db = -20.0 * std::log10(sigma);
    const auto y = channel::awgn_apply(x, {snr_db, 42});
    CHECK(channel_decode(y, 2, 3, model.channel_dec, model.codebook) == zq);
}

TEST_CASE("decode returns a full-size image in [0,1]")
{
    for (auto mode : {TransmissionMode::analog, TransmissionMode::digital}) {
        auto model = CodecModel::create(small_config(mode), 11);
        model.seed_running_stats();
        Rng rng(9);
        const auto img = testing::random_image(16, 32, rng, 1234);
        auto enc = encode(img, 5.0, model);
        apply_channel(enc.payload, {5.0, 3});
        const auto out = reconstruct(enc.payload, model, 1234);
        CHECK(out.same_shape(img));
        CHECK(out.timestamp_us == 1234);
        for (double v : out.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("noiseless digital receiver sees the transmitter's codewords")
{
    auto model = CodecModel::create(small_config(TransmissionMode::digital), 12);
    model.seed_running_stats();
    Rng rng(10);
    const auto enc = encode(testing::random_image(16, 32, rng), 20.0, model);
    CHECK(channel_decode(enc.payload, model) == enc.z_q);
    CHECK(reconstruct(enc.payload, model) == decode(enc.z_q, 20.0, model));
}

TEST_CASE("vq loss terms")
{
    Rng rng(12);
    const Tensor s = random_tensor({1, 3, 4, 4}, rng, 0.0, 1.0);
    const Tensor z = random_tensor({1, 2, 1, 1}, rng);
    const auto zero = vq_loss(s, s, z, z, 0.25);
    CHECK(zero.terms.total == 0.0);

    Tensor e = z;
    e[0] += 0.3;
    e[1] -= 0.3;
    const auto l = vq_loss(s, s, z, e, 0.25);
    CHECK(l.terms.codebook == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(l.terms.commit == doctest::Approx(0.09).epsilon(1e-12));  // unweighted
    CHECK(l.terms.total == doctest::Approx(0.09 * 1.25).epsilon(1e-12));

    CHECK_THROWS_AS(vq_loss(s, Tensor({1, 3, 4, 2}), z, e, 0.25), ConfigError);
}

namespace {

double end_to_end_check(TransmissionMode mode, bool attention)
{
    CodecConfig c = small_config(mode);
    c.attention = attention;
    auto model = CodecModel::create(c, 21);
    Rng rng(22);
    // stretch the codebook so selections sit well inside their cells
    for (auto& v : model.codebook.embeddings.values()) v = rng.uniform(-1.0, 1.0);
    std::vector<ImageFrame> imgs{testing::random_image(16, 32, rng), testing::random_image(16, 32, rng)};
    const Tensor batch = images_to_batch(imgs);

    TrainingGraph graph(model);
    graph.forward(batch, {7.0, 99, nullptr});
    const FrozenSelection frozen = graph.freeze();
    model.zero_grad();
    graph.forward(batch, {7.0, 99, &frozen});
    graph.backward();

    auto params = model.trainable();
    auto loss = [&] { return graph.forward(batch, {7.0, 99, &frozen}).total; };
    const auto res = nn::grad_check(loss, params, {1e-6, 40, 5});
    MESSAGE("end-to-end grad check ", to_string(mode), " worst=", res.worst, " err=", res.max_rel_error);
    return res.max_rel_error;
}

}  // namespace

TEST_CASE("end-to-end codec gradient matches finite differences")
{
    CHECK(end_to_end_check(TransmissionMode::digital, true) <= 1e-4);
    CHECK(end_to_end_check(TransmissionMode::analog, true) <= 1e-4);
    CHECK(end_to_end_check(TransmissionMode::analog, false) <= 1e-4);
}

TEST_CASE("codec checkpoint round-trips bit-exactly")
{
    auto model = CodecModel::create(small_config(TransmissionMode::analog), 31);
    model.seed_running_stats();
    model.codebook.usage[3] = 17.0;
    const auto bytes = model.serialize();
    const auto back = CodecModel::deserialize(bytes);
    CHECK(back.serialize() == bytes);
    CHECK(back.config == model.config);
    CHECK(back.digest() == model.digest());
    CHECK(model.digest_hex().size() == 64);

    Rng rng(1);
    const auto img = testing::random_image(16, 32, rng);
    CHECK(encode(img, 3.0, back).payload == encode(img, 3.0, model).payload);
    CHECK_THROWS_AS(CodecModel::load("/nonexistent/model.ckpt"), IoError);
}
