#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <set>
#include <sstream>
#include <thread>

#include "semcomm/codec/codec.h"
#include "semcomm/core/errors.h"
#include "semcomm/core/rng.h"
#include "semcomm/dataio/synthetic.h"
#include "semcomm/mapping/export.h"
#include "semcomm/transport/align.h"
#include "semcomm/transport/payload.h"
#include "semcomm/transport/session.h"
#include "semcomm/transport/stream.h"
#include "semcomm/transport/wire.h"

using namespace semcomm;
using namespace semcomm::transport;

namespace {

class VectorSink : public ByteSink {
public:
    void write(std::span<const std::uint8_t> bytes) override
    {
        data.insert(data.end(), bytes.begin(), bytes.end());
        written_ += bytes.size();
    }
    std::vector<std::uint8_t> data;
};

class VectorSource : public ByteSource {
public:
    explicit VectorSource(std::vector<std::uint8_t> d) : data(std::move(d)) {}
    std::size_t read(std::span<std::uint8_t> buffer) override
    {
        // Deliberately short reads to exercise reassembly.
        const std::size_t n = std::min({buffer.size(), data.size() - pos, std::size_t{7}});
        std::memcpy(buffer.data(), data.data() + pos, n);
        pos += n;
        return n;
    }
    std::vector<std::uint8_t> data;
    std::size_t pos = 0;
};

ImageFrame stamp(std::int64_t ts, int channels = 1)
{
    return ImageFrame(1, 1, channels, ts);
}

// Direct transcription of the greedy rule over whole vectors.
std::vector<std::pair<std::int64_t, std::int64_t>> greedy_oracle(const std::vector<std::int64_t>& rgb,
                                                                  const std::vector<std::int64_t>& depth,
                                                                  std::int64_t tol)
{
    std::vector<bool> used(depth.size(), false);
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (auto t : rgb) {
        std::size_t best = depth.size();
        for (std::size_t j = 0; j < depth.size(); ++j) {
            if (used[j]) continue;
            if (best == depth.size() || std::llabs(depth[j] - t) < std::llabs(depth[best] - t)) best = j;
        }
        if (best != depth.size() && std::llabs(depth[best] - t) <= tol) {
            used[best] = true;
            out.emplace_back(t, depth[best]);
        }
    }
    return out;
}

std::vector<std::int64_t> jittered_times(Rng& rng, std::size_t n, std::int64_t base, std::int64_t period,
                                         std::int64_t jitter, double gap_prob)
{
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < gap_prob) continue;
        out.push_back(base + std::int64_t(i) * period + std::int64_t(rng.below(2 * jitter + 1)) - jitter);
    }
    std::sort(out.begin(), out.end());
    return out;
}

codec::CodecConfig session_codec_config(codec::TransmissionMode mode)
{
    codec::CodecConfig c;
    c.height = 32;
    c.width = 48;
    c.channel_plan = {3, 4, 6, 6, 5};
    c.codebook_size = 8;
    c.channel_dim = 4;
    c.mode = mode;
    return c;
}

codec::CodecModel session_model(codec::TransmissionMode mode)
{
    auto m = codec::CodecModel::create(session_codec_config(mode), 3);
    m.seed_running_stats();
    return m;
}

struct Fixture {
    dataio::SyntheticScene scene = dataio::make_room_scene(48, 32);
    dataio::SyntheticSequence seq;
    explicit Fixture(int n) : seq(dataio::synth_generate(scene, n, 1)) {}

    std::vector<SourceFrame> frames(bool rgb = true, bool depth = true) const
    {
        std::vector<SourceFrame> out;
        for (const auto& f : seq.frames) {
            if (rgb) out.push_back({SourceFrame::Kind::rgb, f.rgb});
            if (depth) out.push_back({SourceFrame::Kind::depth, f.depth});
        }
        return out;
    }

    CloudConfig cloud() const
    {
        CloudConfig c;
        c.map.label_count = scene.label_count();
        c.map.resolution = 0.1;
        c.intrinsics = scene.intrinsics;
        c.palette = scene.palette;
        c.stride = 2;
        c.poses = seq.groundtruth;
        c.keep_reconstructions = true;
        return c;
    }
};

std::vector<WireFrame> read_all(const std::vector<std::uint8_t>& bytes)
{
    VectorSource src(bytes);
    std::vector<WireFrame> out;
    while (auto f = read_frame(src)) out.push_back(*f);
    return out;
}

std::string ply_text(const mapping::SemanticOctree& map, const mapping::LabelPalette& palette)
{
    std::ostringstream out;
    mapping::write_ply(out, mapping::map_vertices(map, palette));
    return out.str();
}

CloudResult run_loopback(const Fixture& fx, const codec::CodecModel& model, const EdgeConfig& edge,
                         const CloudConfig& cloud, std::size_t pipe_capacity = 1 << 20)
{
    MemoryPipe pipe(pipe_capacity);
    EdgeStats stats;
    std::thread tx([&] { stats = edge_session(vector_source(fx.frames()), model, edge, pipe.sink()); });
    auto result = cloud_session(pipe.source(), model, cloud);
    pipe.close_read();
    tx.join();
    CHECK(stats.completed);
    return result;
}

}  // namespace

TEST_CASE("end-of-stream frame is a bare header")
{
    const WireFrame eos{FrameType::end_of_stream, 0, {}};
    const auto bytes = encode_frame(eos);
    CHECK(bytes.size() == 18);
    CHECK(bytes[0] == 'S');
    CHECK(bytes[3] == '1');
    CHECK(bytes[4] == kWireVersion);
    CHECK(bytes[5] == 3);
    CHECK(decode_frame(bytes) == eos);
}

TEST_CASE("wire frames round trip")
{
    Rng rng(1);
    WireFrame f{FrameType::semantic, 1'234'567'890'123ull, std::vector<std::uint8_t>(1024)};
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng.below(256));
    const auto bytes = encode_frame(f);
    CHECK(bytes.size() == 18 + 1024);
    CHECK(decode_frame(bytes) == f);

    VectorSink sink;
    std::vector<WireFrame> frames;
    for (int i = 0; i < 100; ++i) {
        WireFrame g{static_cast<FrameType>(rng.below(4)), rng.next_u64(), std::vector<std::uint8_t>(rng.below(300))};
        for (auto& b : g.payload) b = static_cast<std::uint8_t>(rng.below(256));
        write_frame(sink, g);
        frames.push_back(g);
    }
    CHECK(read_all(sink.data) == frames);
}

TEST_CASE("malformed wire input")
{
    auto bytes = encode_frame({FrameType::depth, 5, {1, 2, 3}});
    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_frame(bad), doctest::Contains("not a SCM stream"), ProtocolError);
    bad = bytes;
    bad[4] = 9;
    CHECK_THROWS_WITH_AS(decode_frame(bad), doctest::Contains("unsupported wire version"), ProtocolError);
    bad = bytes;
    bad[5] = 7;
    CHECK_THROWS_WITH_AS(decode_frame(bad), doctest::Contains("unknown frame type 7"), ProtocolError);
    CHECK_THROWS_WITH_AS(decode_frame(std::span(bytes).first(20)), doctest::Contains("incomplete frame"),
                         ProtocolError);
    bad = bytes;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_frame(bad), ProtocolError);

    VectorSource truncated(std::vector<std::uint8_t>(bytes.begin(), bytes.end() - 1));
    CHECK_THROWS_WITH_AS(read_frame(truncated), doctest::Contains("incomplete frame"), ProtocolError);
    VectorSource empty({});
    CHECK_FALSE(read_frame(empty).has_value());
    VectorSource huge(encode_frame({FrameType::depth, 0, std::vector<std::uint8_t>(100)}));
    CHECK_THROWS_AS(read_frame(huge, 50), ProtocolError);
}

TEST_CASE("index bit packing")
{
    const std::vector<std::uint16_t> idx{1, 2, 3, 4};
    const auto packed = pack_indices(idx, 3);
    REQUIRE(packed.size() == 2);
    // 001 010 011 100 LSB-first -> bits 0..11
    CHECK(packed[0] == 0b11'010'001);
    CHECK(packed[1] == 0b1000);
    CHECK(unpack_indices(packed, 4, 3) == idx);

    Rng rng(2);
    for (int bits = 1; bits <= 16; ++bits) {
        std::vector<std::uint16_t> v(rng.below(100) + 1);
        for (auto& x : v) x = static_cast<std::uint16_t>(rng.below(std::uint64_t{1} << bits));
        const auto p = pack_indices(v, bits);
        CHECK(p.size() == (v.size() * bits + 7) / 8);
        CHECK(unpack_indices(p, v.size(), bits) == v);
    }
    CHECK_THROWS_AS(pack_indices(std::vector<std::uint16_t>{8}, 3), ConfigError);
    CHECK_THROWS_AS(unpack_indices(packed, 6, 3), ProtocolError);
}

TEST_CASE("semantic payloads round trip")
{
    codec::SemanticPayload d;
    d.grid_h = 30;
    d.grid_w = 40;
    d.snr_db = 7.5f;
    d.indices.resize(1200);
    Rng rng(3);
    for (auto& i : d.indices) i = static_cast<std::uint16_t>(rng.below(512));
    const auto bytes = encode_semantic(d, 9);
    CHECK(bytes.size() == kSemanticHeaderSize + kDigitalBodyHeaderSize + 1350);
    CHECK(8 * (bytes.size() + kFrameHeaderSize) == 10800 + 224);
    CHECK(decode_semantic(bytes) == d);

    codec::SemanticPayload a;
    a.mode = codec::TransmissionMode::analog;
    a.grid_h = 2;
    a.grid_w = 3;
    a.snr_db = -2.0f;
    a.channel_dim = 4;
    a.scale = 0.37f;
    a.symbols.resize(24);
    for (auto& s : a.symbols) s = static_cast<float>(rng.gaussian());
    const auto abytes = encode_semantic(a, 3);
    CHECK(abytes.size() == kSemanticHeaderSize + kAnalogBodyHeaderSize + 24 * 4);
    CHECK(decode_semantic(abytes) == a);

    CHECK_THROWS_AS(decode_semantic(std::span(bytes).first(12)), ProtocolError);
    auto wrong_mode = bytes;
    wrong_mode[0] = 9;
    CHECK_THROWS_AS(decode_semantic(wrong_mode), ProtocolError);
}

TEST_CASE("depth and sync payloads")
{
    ImageFrame depth(3, 4, 1);
    Rng rng(4);
    for (auto& v : depth.data) v = double(rng.below(65536));
    depth.at(0, 0) = 70000.0;
    depth.at(0, 1) = -3.0;
    depth.at(0, 2) = 10.6;
    const auto bytes = encode_depth(depth, 5000.0);
    CHECK(bytes.size() == 8 + 2 * 12);
    const auto back = decode_depth(bytes);
    CHECK(back.depth_scale == 5000.0f);
    CHECK(back.depth.at(0, 0) == 65535.0);
    CHECK(back.depth.at(0, 1) == 0.0);
    CHECK(back.depth.at(0, 2) == 11.0);
    CHECK(back.depth.at(2, 3) == depth.at(2, 3));
    CHECK_THROWS_AS(decode_depth(std::span(bytes).first(10)), ProtocolError);

    ModelHash h{};
    h[0] = 0xAB;
    h[31] = 0xCD;
    CHECK(decode_sync(h) == h);
    CHECK_THROWS_AS(decode_sync(std::span(h).first(31)), ProtocolError);
}

TEST_CASE("alignment examples")
{
    auto r = align_frames({stamp(100), stamp(200)}, {stamp(105), stamp(195)}, 20);
    REQUIRE(r.pairs.size() == 2);
    CHECK(r.pairs[0].depth.timestamp_us == 105);
    CHECK(r.pairs[0].skew_us == 5);
    CHECK(r.pairs[1].skew_us == -5);
    CHECK(r.dropped.empty());

    r = align_frames({stamp(100)}, {stamp(200)}, 20);
    CHECK(r.pairs.empty());
    REQUIRE(r.dropped.size() == 2);

    // Equidistant depth frames: the earlier one wins.
    r = align_frames({stamp(100)}, {stamp(90), stamp(110)}, 20);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].depth.timestamp_us == 90);

    // Greedy: the first rgb takes the nearest depth even if the second wanted it.
    r = align_frames({stamp(100), stamp(108)}, {stamp(107)}, 20);
    REQUIRE(r.pairs.size() == 1);
    CHECK(r.pairs[0].rgb.timestamp_us == 100);

    CHECK(align_frames({}, {}, 20).pairs.empty());
    CHECK_THROWS_AS(align_frames({stamp(5), stamp(1)}, {}, 20), ProtocolError);
}

TEST_CASE("alignment matches the greedy oracle and is invariant to arrival interleaving")
{
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t tol = 1 + std::int64_t(rng.below(30'000));
        const auto rgb_ts = jittered_times(rng, 1 + rng.below(40), 0, 33'333, 15'000, 0.1);
        const auto depth_ts = jittered_times(rng, 1 + rng.below(40), 2'000, 33'333, 15'000, 0.15);
        std::vector<ImageFrame> rgb, depth;
        for (auto t : rgb_ts) rgb.push_back(stamp(t, 3));
        for (auto t : depth_ts) depth.push_back(stamp(t));

        const auto want = greedy_oracle(rgb_ts, depth_ts, tol);
        const auto got = align_frames(rgb, depth, tol);
        REQUIRE(got.pairs.size() == want.size());
        std::set<std::int64_t> used_depth;
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(got.pairs[i].rgb.timestamp_us == want[i].first);
            CHECK(got.pairs[i].depth.timestamp_us == want[i].second);
            CHECK(std::llabs(got.pairs[i].skew_us) <= tol);
        }
        CHECK(got.pairs.size() * 2 + got.dropped.size() == rgb.size() + depth.size());

        std::vector<std::pair<std::int64_t, std::int64_t>> streamed;
        std::size_t drops = 0;
        StreamingAligner s(
            tol, [&](AlignedPair&& p) { streamed.emplace_back(p.rgb.timestamp_us, p.depth.timestamp_us); },
            [&](const DroppedFrame&) { ++drops; });
        std::size_t i = 0, j = 0;
        while (i < rgb.size() || j < depth.size()) {
            if (j == depth.size() || (i < rgb.size() && rng.below(2))) {
                s.push_rgb(rgb[i++]);
            } else {
                s.push_depth(depth[j++]);
            }
        }
        s.finish();
        CHECK(streamed == want);
        CHECK(drops == got.dropped.size());
    }
}

TEST_CASE("bounded queue")
{
    BoundedQueue<int> q(2);
    CHECK(q.push(1));
    CHECK(q.push(2));
    std::thread producer([&] {
        for (int i = 3; i <= 50; ++i) q.push(i);
        q.close();
    });
    std::vector<int> got;
    while (auto v = q.pop()) got.push_back(*v);
    producer.join();
    CHECK(got.size() == 50);
    CHECK(std::is_sorted(got.begin(), got.end()));
    CHECK(q.high_water() <= 2);
    CHECK_FALSE(q.push(99));
}

TEST_CASE("endpoint parsing")
{
    auto e = parse_endpoint("tcp:127.0.0.1:9000");
    CHECK(e.kind == Endpoint::Kind::tcp);
    CHECK(e.host == "127.0.0.1");
    CHECK(e.port == 9000);
    e = parse_endpoint("file:/tmp/x.scm");
    CHECK(e.kind == Endpoint::Kind::file);
    CHECK(e.path == "/tmp/x.scm");
    CHECK(parse_endpoint("pipe:-").kind == Endpoint::Kind::pipe);
    CHECK_THROWS_AS(parse_endpoint("tcp:host"), ConfigError);
    CHECK_THROWS_AS(parse_endpoint("tcp:host:99999"), ConfigError);
    CHECK_THROWS_AS(parse_endpoint("udp:x"), ConfigError);
}

TEST_CASE("edge session frame accounting")
{
    const Fixture fx(10);
    const auto model = session_model(codec::TransmissionMode::digital);
    VectorSink sink;
    const auto stats = edge_session(vector_source(fx.frames()), model, {}, sink);
    CHECK(stats.completed);
    const auto frames = read_all(sink.data);
    CHECK(frames.size() == 21);
    CHECK(stats.frames_sent == 21);
    CHECK(stats.semantic_frames == 10);
    CHECK(stats.depth_frames == 10);
    CHECK(stats.bytes_sent == sink.data.size());
    CHECK(frames.back().type == FrameType::end_of_stream);
    CHECK(frames[0].type == FrameType::semantic);
    CHECK(frames[0].timestamp_us == std::uint64_t(fx.scene.start_us));

    EdgeConfig with_sync;
    with_sync.model_hash = model.digest();
    VectorSink sink2;
    edge_session(vector_source(fx.frames()), model, with_sync, sink2);
    const auto frames2 = read_all(sink2.data);
    CHECK(frames2.size() == 22);
    CHECK(frames2[0].type == FrameType::codebook_sync);

    VectorSink empty;
    const auto none = edge_session(vector_source({}), model, {}, empty);
    CHECK(none.completed);
    const auto only = read_all(empty.data);
    REQUIRE(only.size() == 1);
    CHECK(only[0].type == FrameType::end_of_stream);
}

TEST_CASE("loopback reconstructions equal local decoding")
{
    const Fixture fx(6);
    for (auto mode : {codec::TransmissionMode::digital, codec::TransmissionMode::analog}) {
        const auto model = session_model(mode);
        EdgeConfig edge;
        edge.channel.snr_db = 10.0;
        edge.channel.seed = 42;
        edge.model_hash = model.digest();
        auto cloud = fx.cloud();
        cloud.require_sync = true;
        const auto result = run_loopback(fx, model, edge, cloud);
        CHECK(result.error.empty());
        CHECK(result.end_of_stream);
        CHECK(result.sync_verified);
        CHECK(result.semantic_frames == 6);
        CHECK(result.depth_frames == 6);
        CHECK(result.pairs == 6);
        CHECK(result.frames.size() == 6);
        CHECK(result.map.size() > 0);
        REQUIRE(result.reconstructions.size() == 6);
        for (std::size_t i = 0; i < 6; ++i) {
            auto payload = codec::encode(fx.seq.frames[i].rgb, edge.channel.snr_db, model).payload;
            codec::apply_channel(payload, {edge.channel.snr_db, mix_seed(edge.channel.seed, i)});
            const auto local = codec::reconstruct(payload, model, fx.seq.frames[i].rgb.timestamp_us);
            CHECK(result.reconstructions[i] == local);
            if (mode == codec::TransmissionMode::digital) CHECK(result.received_indices[i] == payload.indices);
        }
        for (const auto stage : {"decode", "align", "segment", "map_update", "pair_latency"}) {
            CHECK(result.timing.report().count(stage) == 1);
        }
    }
}

TEST_CASE("loopback over tcp matches the in-memory pipe")
{
    const Fixture fx(5);
    const auto model = session_model(codec::TransmissionMode::digital);
    const auto cloud = fx.cloud();
    const auto in_memory = run_loopback(fx, model, {}, cloud);

    TcpListener listener("127.0.0.1", 0);
    REQUIRE(listener.port() != 0);
    EdgeStats stats;
    std::thread tx([&] {
        auto conn = tcp_connect("127.0.0.1", listener.port());
        stats = edge_session(vector_source(fx.frames()), model, {}, *conn);
    });
    auto conn = listener.accept(std::chrono::seconds(10), std::chrono::seconds(10));
    const auto over_tcp = cloud_session(*conn, model, cloud);
    tx.join();
    CHECK(stats.completed);
    CHECK(over_tcp.error.empty());
    CHECK(over_tcp.reconstructions == in_memory.reconstructions);
    CHECK(ply_text(over_tcp.map, cloud.palette) == ply_text(in_memory.map, cloud.palette));
    CHECK(over_tcp.bytes_received == stats.bytes_sent);
}

TEST_CASE("tcp accept times out and connect gives up")
{
    TcpListener listener("127.0.0.1", 0);
    CHECK_THROWS_WITH_AS(listener.accept(std::chrono::milliseconds(50)), doctest::Contains("timed out"), IoError);
    const auto port = listener.port();
    CHECK_THROWS_AS(tcp_connect("127.0.0.1", std::uint16_t(port == 65535 ? 1 : 0), {2, std::chrono::milliseconds(1)}),
                    Error);
}

TEST_CASE("depth-only stream yields an empty map")
{
    const Fixture fx(4);
    const auto model = session_model(codec::TransmissionMode::digital);
    VectorSink sink;
    edge_session(vector_source(fx.frames(false, true)), model, {}, sink);
    VectorSource src(sink.data);
    const auto result = cloud_session(src, model, fx.cloud());
    CHECK(result.error.empty());
    CHECK(result.map.empty());
    CHECK(result.pairs == 0);
    CHECK(result.dropped_depth == 4);
}

TEST_CASE("end-of-stream mid-stream stops the session cleanly")
{
    const Fixture fx(6);
    const auto model = session_model(codec::TransmissionMode::digital);
    VectorSink first, second;
    const auto frames = fx.frames();
    edge_session(vector_source({frames.begin(), frames.begin() + 6}), model, {}, first);
    edge_session(vector_source({frames.begin() + 6, frames.end()}), model, {}, second);
    auto bytes = first.data;
    bytes.insert(bytes.end(), second.data.begin(), second.data.end());
    VectorSource src(bytes);
    const auto result = cloud_session(src, model, fx.cloud());
    CHECK(result.error.empty());
    CHECK(result.end_of_stream);
    CHECK(result.pairs == 3);
    CHECK(result.map.size() > 0);
}

TEST_CASE("truncated stream keeps the partial map and reports the error")
{
    const Fixture fx(4);
    const auto model = session_model(codec::TransmissionMode::digital);
    VectorSink sink;
    edge_session(vector_source(fx.frames()), model, {}, sink);
    auto bytes = sink.data;
    bytes.resize(bytes.size() - kFrameHeaderSize);
    VectorSource clean_cut(bytes);
    auto result = cloud_session(clean_cut, model, fx.cloud());
    CHECK(result.error.find("stream closed before end-of-stream") != std::string::npos);
    CHECK(result.pairs == 4);
    CHECK(result.map.size() > 0);

    bytes.resize(bytes.size() - 5);
    VectorSource mid_frame(bytes);
    result = cloud_session(mid_frame, model, fx.cloud());
    CHECK(result.error.find("incomplete frame") != std::string::npos);
    CHECK(result.map.size() > 0);
}

TEST_CASE("codebook hash mismatch is refused")
{
    const Fixture fx(3);
    const auto model = session_model(codec::TransmissionMode::digital);
    EdgeConfig edge;
    ModelHash wrong = model.digest();
    wrong[0] ^= 1;
    edge.model_hash = wrong;
    VectorSink sink;
    edge_session(vector_source(fx.frames()), model, edge, sink);
    VectorSource src(sink.data);
    const auto result = cloud_session(src, model, fx.cloud());
    CHECK(result.error.find("hash mismatch") != std::string::npos);
    CHECK(result.map.empty());

    VectorSink unsynced;
    edge_session(vector_source(fx.frames()), model, {}, unsynced);
    VectorSource src2(unsynced.data);
    auto cloud = fx.cloud();
    cloud.require_sync = true;
    CHECK(cloud_session(src2, model, cloud).error.find("before codebook sync") != std::string::npos);
}

TEST_CASE("frames without a pose are skipped")
{
    const Fixture fx(3);
    const auto model = session_model(codec::TransmissionMode::digital);
    auto cloud = fx.cloud();
    cloud.poses = Trajectory({fx.seq.groundtruth[0]});
    VectorSink sink;
    edge_session(vector_source(fx.frames()), model, {}, sink);
    VectorSource src(sink.data);
    const auto result = cloud_session(src, model, cloud);
    CHECK(result.pairs == 3);
    CHECK(result.skipped_no_pose == 2);
    CHECK(result.frames.size() == 1);
}

TEST_CASE("small buffers apply back-pressure without changing the result")
{
    const Fixture fx(8);
    const auto model = session_model(codec::TransmissionMode::digital);
    auto cloud = fx.cloud();
    const auto roomy = run_loopback(fx, model, {}, cloud);
    cloud.queue_capacity = 1;
    const auto tight = run_loopback(fx, model, {}, cloud, 64);
    CHECK(tight.error.empty());
    CHECK(tight.queue_high_water <= 1);
    CHECK(ply_text(tight.map, cloud.palette) == ply_text(roomy.map, cloud.palette));
}

TEST_CASE("label resizing")
{
    LabelImage l(2, 2);
    l.at(0, 0) = 1;
    l.at(0, 1) = 2;
    l.at(1, 0) = 3;
    l.at(1, 1) = 4;
    const auto big = resize_labels(l, 4, 4);
    CHECK(big.at(0, 0) == 1);
    CHECK(big.at(1, 1) == 1);
    CHECK(big.at(0, 3) == 2);
    CHECK(big.at(3, 0) == 3);
    CHECK(big.at(3, 3) == 4);
    CHECK(resize_labels(big, 2, 2) == l);
}
