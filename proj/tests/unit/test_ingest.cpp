#include <catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "splx/ingest.hpp"
#include "splx/oracles.hpp"

using namespace splx;
using namespace splx::ingest;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path dir = fs::temp_directory_path() / ("splx_ingest_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path &p, const std::string &text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string header_bytes(std::uint8_t kind, std::uint8_t dtype, std::uint8_t ndim, std::uint64_t rows,
                         std::uint64_t cols, std::uint32_t version = 1) {
    std::string s = "SPLX";
    for (int k = 0; k < 4; ++k) { s.push_back(static_cast<char>((version >> (8 * k)) & 0xff)); }
    s.push_back(static_cast<char>(kind));
    s.push_back(static_cast<char>(dtype));
    s.push_back(static_cast<char>(ndim));
    for (std::uint64_t d : {rows, cols}) {
        for (int k = 0; k < 8; ++k) { s.push_back(static_cast<char>((d >> (8 * k)) & 0xff)); }
    }
    return s;
}

void append_f64(std::string &s, double v) {
    char buf[8];
    std::memcpy(buf, &v, 8);  // little-endian host assumed by the test
    s.append(buf, 8);
}

}  // namespace

TEST_CASE("minimal hand-built dump decodes to the identity", "[ingest]") {
    std::string bytes = header_bytes(1, 2, 2, 2, 2);
    for (double v : {1.0, 0.0, 0.0, 1.0}) { append_f64(bytes, v); }
    const Dump d = decode_dump(bytes);
    CHECK(d.header.kind == DumpKind::Activation);
    CHECK(d.header.rows == 2);
    CHECK((d.matrix - DenseMatrix::identity(2)).max_abs() == 0.0);
}

TEST_CASE("encoder writes the documented layout", "[ingest]") {
    const DenseMatrix m{{1.5, -2.0, 0.25}};
    const std::string bytes = encode_dump(m, DumpKind::Gradient, DumpDtype::Float64);
    std::string expected = header_bytes(2, 2, 2, 1, 3);
    for (double v : {1.5, -2.0, 0.25}) { append_f64(expected, v); }
    CHECK(bytes == expected);
    CHECK(kHeaderSize == 27);
}

TEST_CASE("1x1 float64 file size", "[ingest]") {
    const fs::path dir = scratch("size");
    write_dump(DenseMatrix{{4.0}}, DumpKind::Activation, DumpDtype::Float64, dir / "one.splx");
    CHECK(fs::file_size(dir / "one.splx") == 35);
    write_dump(DenseMatrix{{4.0}}, DumpKind::Activation, DumpDtype::Float32, dir / "one32.splx");
    CHECK(fs::file_size(dir / "one32.splx") == 31);
}

TEST_CASE("round trips", "[ingest]") {
    const fs::path dir = scratch("roundtrip");
    std::mt19937_64 rng(109);
    for (auto [r, c] : {std::pair{1u, 1u}, std::pair{5u, 3u}, std::pair{17u, 33u}}) {
        DenseMatrix m = oracles::gaussian_matrix(r, c, rng, 1e3);
        m(0, 0) = -0.0;
        write_dump(m, DumpKind::Gradient, DumpDtype::Float64, dir / "m64.splx");
        const Dump back = read_dump_with_header(dir / "m64.splx");
        CHECK(back.header.kind == DumpKind::Gradient);
        REQUIRE(back.matrix.rows() == r);
        REQUIRE(back.matrix.cols() == c);
        bool identical = true;
        for (std::size_t i = 0; i < r; ++i) {
            identical = identical && std::memcmp(back.matrix.row(i).data(), m.row(i).data(), c * sizeof(double)) == 0;
        }
        CHECK(identical);
        CHECK(encode_dump(back.matrix, DumpKind::Gradient, DumpDtype::Float64) ==
              read_file_bytes(dir / "m64.splx"));

        write_dump(m, DumpKind::Activation, DumpDtype::Float32, dir / "m32.splx");
        const DenseMatrix narrow = read_dump(dir / "m32.splx");
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                CHECK(std::abs(narrow(i, j) - m(i, j)) <= 1e-6 * std::abs(m(i, j)));
            }
        }
    }
}

TEST_CASE("committed fixtures decode", "[ingest]") {
    const fs::path dir = SPLX_FIXTURES;
    const DenseMatrix a = read_dump(dir / "identity_cov.splx");
    CHECK(a.rows() == 9);
    CHECK(a.cols() == 4);
    const DenseMatrix a32 = read_dump(dir / "identity_cov_f32.splx");
    CHECK((a32 - a).max_abs() == 0.0);
    CHECK(read_dump_with_header(dir / "rank1_grad.splx").header.kind == DumpKind::Gradient);
}

TEST_CASE("decode error paths", "[ingest]") {
    std::string good = header_bytes(1, 2, 2, 1, 2);
    append_f64(good, 1.0);
    append_f64(good, 2.0);
    REQUIRE_NOTHROW(decode_dump(good));

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    REQUIRE_THROWS_AS(decode_dump(bad_magic), FormatError);
    REQUIRE_THROWS_AS(decode_dump(good.substr(0, good.size() - 1)), TruncationError);
    REQUIRE_THROWS_AS(decode_dump(good.substr(0, 6)), TruncationError);
    REQUIRE_THROWS_AS(decode_dump(good.substr(0, 15)), TruncationError);
    REQUIRE_THROWS_AS(decode_dump(good + "x"), FormatError);

    std::string three_d = header_bytes(1, 2, 3, 1, 2);
    REQUIRE_THROWS_AS(decode_dump(three_d + std::string(24, '\0')), UnsupportedShape);
    REQUIRE_THROWS_AS(decode_dump(header_bytes(3, 2, 2, 1, 1) + std::string(8, '\0')), FormatError);
    REQUIRE_THROWS_AS(decode_dump(header_bytes(1, 9, 2, 1, 1) + std::string(8, '\0')), FormatError);
    REQUIRE_THROWS_AS(decode_dump(header_bytes(1, 2, 2, 0, 1)), FormatError);
    REQUIRE_THROWS_AS(decode_dump(header_bytes(1, 2, 2, 1, 1, 2) + std::string(8, '\0')), FormatError);

    std::string nan_payload = header_bytes(1, 2, 2, 1, 1);
    append_f64(nan_payload, std::nan(""));
    REQUIRE_THROWS_AS(decode_dump(nan_payload), FormatError);

    REQUIRE_THROWS_AS(read_dump("/nonexistent/file.splx"), IoError);
}

TEST_CASE("single-byte corruptions of magic and version are rejected", "[ingest]") {
    std::string good = header_bytes(1, 2, 2, 1, 1);
    append_f64(good, 3.0);
    std::mt19937_64 rng(113);
    int rejected = 0;
    for (int rep = 0; rep < 10; ++rep) {
        std::string bytes = good;
        const auto pos = static_cast<std::size_t>(rep % 8);
        const auto flip = static_cast<char>(1 + rng() % 255);
        bytes[pos] = static_cast<char>(bytes[pos] ^ flip);
        try {
            decode_dump(bytes);
        } catch (const FormatError &) {
            ++rejected;
        }
    }
    CHECK(rejected == 10);
}

TEST_CASE("manifest parsing and tokens_to_target", "[ingest]") {
    const fs::path dir = scratch("manifest");
    write_dump(DenseMatrix{{1.0, 0.0}, {0.0, 1.0}}, DumpKind::Activation, DumpDtype::Float64, dir / "a.splx");
    const std::string text = R"({
      "family": "f", "tier": 16, "scale": "d12", "target_loss": 3.2, "throughput": 1000.0,
      "extra": true,
      "checkpoints": [
        {"step": 1, "tokens": 100, "loss": 3.5, "activation_dump": "a.splx"},
        {"step": 2, "tokens": 200, "loss": 3.3},
        {"step": 3, "tokens": 300, "loss": 3.19, "note": "x"},
        {"step": 4, "tokens": 400, "loss": 3.0}
      ]})";
    write_file(dir / "run.json", text);
    const RunManifest m = read_manifest(dir / "run.json");
    CHECK(m.family == "f");
    CHECK(m.tier == 16);
    CHECK(m.throughput == 1000.0);
    CHECK(m.tokens_to_target() == 300.0);
    CHECK(m.complete());
    CHECK(m.warnings.size() == 2);
    REQUIRE(m.early_activation(250.0) != nullptr);
    CHECK(m.early_activation(250.0)->step == 1);
    CHECK(m.early_activation(50.0) == nullptr);
    CHECK(m.checkpoints[0].activation_dump == (dir / "a.splx").lexically_normal());

    // Same file twice: identical structure.
    const RunManifest again = read_manifest(dir / "run.json");
    CHECK(again.checkpoints == m.checkpoints);

    // Writing and re-reading keeps everything.
    write_file(dir / "copy.json", manifest_to_json(m, dir));
    const RunManifest copy = read_manifest(dir / "copy.json");
    CHECK(copy.checkpoints == m.checkpoints);
    CHECK(copy.target_loss == m.target_loss);
}

TEST_CASE("manifest incomplete and error paths", "[ingest]") {
    const fs::path dir = scratch("manifest_err");
    const auto parse = [&](const std::string &t) { return parse_manifest(t, dir); };
    const RunManifest never = parse(
        R"({"family":"f","tier":1,"scale":"d36","target_loss":1.0,"checkpoints":[{"step":1,"tokens":10,"loss":2.0}]})");
    CHECK_FALSE(never.tokens_to_target().has_value());
    CHECK_FALSE(never.complete());

    REQUIRE_THROWS_AS(parse(R"({"family":"f","tier":1,"scale":"d12","target_loss":1,"checkpoints":[
        {"step":1,"tokens":10},{"step":2,"tokens":10}]})"),
                      OrderError);
    REQUIRE_THROWS_AS(parse(R"({"family":"f","tier":1,"scale":"d12","target_loss":1,"checkpoints":[
        {"step":1,"tokens":20},{"step":2,"tokens":10}]})"),
                      OrderError);
    try {
        parse(R"({"family":"f","tier":1,"scale":"d12","target_loss":1,"checkpoints":[{"step":1,"tokens":"x"}]})");
        FAIL("expected SchemaError");
    } catch (const SchemaError &e) {
        CHECK(e.field_path() == "checkpoints[0].tokens");
    }
    REQUIRE_THROWS_AS(parse(R"({"family":"f","tier":1,"scale":"d24","target_loss":1,"checkpoints":[]})"), SchemaError);
    REQUIRE_THROWS_AS(parse(R"({"tier":1,"scale":"d12","target_loss":1,"checkpoints":[]})"), SchemaError);
    REQUIRE_THROWS_AS(parse(R"({"family":"f","tier":0,"scale":"d12","target_loss":1,"checkpoints":[]})"), SchemaError);
    REQUIRE_THROWS_AS(parse(R"({"family":"f","tier":1,"scale":"d12","target_loss":1,"checkpoints":[
        {"step":1,"tokens":1,"activation_dump":"missing.splx"}]})"),
                      SchemaError);
    REQUIRE_THROWS_AS(parse("not json"), SchemaError);
}
