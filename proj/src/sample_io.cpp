#include "isbp/sample_io.hpp"

#include "isbp/errors.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace isbp {
namespace {

constexpr std::uint8_t kMagic[4] = {'I', 'S', 'B', 'P'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t at) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<T>(static_cast<T>(in[at + i]) << (8 * i));
    }
    return v;
}

void put_matrix(std::vector<std::uint8_t>& out, const SampleRecord::Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            put_le(out, std::bit_cast<std::uint32_t>(m(r, c)));
        }
    }
}

SampleRecord::Matrix get_matrix(const std::vector<std::uint8_t>& in, std::size_t& at, std::uint32_t cols) {
    SampleRecord::Matrix m(6, cols);
    for (Eigen::Index r = 0; r < 6; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c, at += 4) {
            m(r, c) = std::bit_cast<float>(get_le<std::uint32_t>(in, at));
        }
    }
    return m;
}

} // namespace

SampleRecord SampleRecord::from(int label, const PhysInfoMatrix& tv, const PhysInfoMatrix& uv) {
    return {label, tv.values.cast<float>(), uv.values.cast<float>()};
}

std::vector<std::uint8_t> encode_sample(const SampleRecord& s) {
    if (s.label < 1 || s.label > 255) {
        throw std::invalid_argument("sample label must fit in one byte and be positive");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kSampleHeaderBytes + 24 * static_cast<std::size_t>(s.tv.cols() + s.uv.cols()));
    for (const auto b : kMagic) out.push_back(b);
    put_le(out, kSampleFormatVersion);
    out.push_back(static_cast<std::uint8_t>(s.label));
    put_le(out, static_cast<std::uint32_t>(s.tv.cols()));
    put_le(out, static_cast<std::uint32_t>(s.uv.cols()));
    put_matrix(out, s.tv);
    put_matrix(out, s.uv);
    return out;
}

SampleRecord decode_sample(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kSampleHeaderBytes) {
        throw FormatError("truncated header: expected " + std::to_string(kSampleHeaderBytes) + " bytes, got " +
                              std::to_string(bytes.size()),
                          bytes.size());
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("bad magic, expected \"ISBP\"", 0);
    }
    const auto version = get_le<std::uint16_t>(bytes, 4);
    if (version != kSampleFormatVersion) {
        throw FormatError("unsupported format version " + std::to_string(version), 4);
    }
    const int label = bytes[6];
    if (label < 1 || label > 7) {
        throw FormatError("label out of range: " + std::to_string(label), 6);
    }
    const auto s = get_le<std::uint32_t>(bytes, 7);
    const auto c = get_le<std::uint32_t>(bytes, 11);
    const std::size_t expected = kSampleHeaderBytes + 24 * (static_cast<std::size_t>(s) + c);
    if (bytes.size() != expected) {
        throw FormatError((bytes.size() < expected ? "truncated sample: expected " : "trailing data: expected ") +
                              std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()),
                          std::min(bytes.size(), expected));
    }
    SampleRecord out;
    out.label = label;
    std::size_t at = kSampleHeaderBytes;
    out.tv = get_matrix(bytes, at, s);
    out.uv = get_matrix(bytes, at, c);
    return out;
}

void write_sample(const std::filesystem::path& path, const SampleRecord& s) {
    const auto bytes = encode_sample(s);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("cannot write sample " + path.string());
    }
}

SampleRecord read_sample(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open sample " + path.string());
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return decode_sample(bytes);
}

} // namespace isbp
