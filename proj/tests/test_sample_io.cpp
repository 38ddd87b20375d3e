#include "isbp/errors.hpp"
#include "isbp/rng.hpp"
#include "isbp/sample_io.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <string>

using namespace isbp;

namespace {

SampleRecord random_record(int label, int s, int c, std::uint64_t seed) {
    Rng rng(seed);
    SampleRecord r;
    r.label = label;
    r.tv.resize(6, s);
    r.uv.resize(6, c);
    for (Eigen::Index i = 0; i < r.tv.size(); ++i) r.tv.data()[i] = static_cast<float>(rng.normal(0.0, 100.0));
    for (Eigen::Index i = 0; i < r.uv.size(); ++i) r.uv.data()[i] = static_cast<float>(rng.normal(0.0, 100.0));
    return r;
}

std::string hex(const std::vector<std::uint8_t>& b, std::size_t n) {
    std::string out;
    char buf[4];
    for (std::size_t i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof buf, i ? " %02x" : "%02x", b[i]);
        out += buf;
    }
    return out;
}

} // namespace

TEST_CASE("header layout") {
    const auto bytes = encode_sample(random_record(3, 880, 220, 1));
    CHECK(hex(bytes, kSampleHeaderBytes) == "49 53 42 50 01 00 03 70 03 00 00 dc 00 00 00");
    CHECK(bytes.size() == 15 + 24 * (880 + 220));
}

TEST_CASE("payload is row-major little-endian float32") {
    SampleRecord r;
    r.label = 1;
    r.tv = SampleRecord::Matrix::Zero(6, 2);
    r.uv = SampleRecord::Matrix::Zero(6, 1);
    r.tv(0, 1) = 1.0f;  // second value of row 0
    r.tv(1, 0) = -2.0f; // first value of row 1
    const auto b = encode_sample(r);
    CHECK(hex(std::vector<std::uint8_t>(b.begin() + 19, b.begin() + 23), 4) == "00 00 80 3f");
    CHECK(hex(std::vector<std::uint8_t>(b.begin() + 23, b.begin() + 27), 4) == "00 00 00 c0");
}

TEST_CASE("roundtrip is bit exact") {
    for (int label = 1; label <= 7; ++label) {
        const auto r = random_record(label, 37 * label, 11 * label, label);
        CHECK(decode_sample(encode_sample(r)) == r);
    }
    auto special = random_record(2, 4, 4, 9);
    special.tv(0, 0) = std::numeric_limits<float>::denorm_min();
    special.tv(1, 1) = -0.0f;
    special.uv(2, 2) = std::numeric_limits<float>::max();
    const auto back = decode_sample(encode_sample(special));
    CHECK(back == special);
    CHECK(std::signbit(back.tv(1, 1)));

    const auto path = std::filesystem::temp_directory_path() / "isbp_roundtrip_test.isbp";
    write_sample(path, special);
    CHECK(read_sample(path) == special);
    std::filesystem::remove(path);
}

TEST_CASE("conversion from physical information matrices") {
    PhysInfoMatrix tv(400.0, 3), uv(100.0, 2);
    tv.values.setConstant(1.0 / 3.0);
    uv.values.setConstant(2.5);
    const auto r = SampleRecord::from(5, tv, uv);
    CHECK(r.tv(4, 2) == static_cast<float>(1.0 / 3.0));
    CHECK(r.uv(0, 1) == 2.5f);
}

TEST_CASE("format errors carry byte offsets") {
    const auto good = encode_sample(random_record(3, 10, 5, 2));

    auto bad = good;
    bad[1] = 'X';
    try {
        decode_sample(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 0);
    }

    bad = good;
    bad[4] = 2;
    try {
        decode_sample(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 4);
    }

    bad = good;
    bad[6] = 9;
    try {
        decode_sample(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.offset() == 6);
    }

    bad.assign(good.begin(), good.end() - 7);
    try {
        decode_sample(bad);
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        const std::string what = e.what();
        CHECK(what.find("expected " + std::to_string(good.size())) != std::string::npos);
        CHECK(what.find("got " + std::to_string(bad.size())) != std::string::npos);
        CHECK(e.offset() == bad.size());
    }

    bad.assign(good.begin(), good.begin() + 9);
    CHECK_THROWS_AS(decode_sample(bad), FormatError);

    bad = good;
    bad.push_back(0);
    CHECK_THROWS_AS(decode_sample(bad), FormatError);
}
