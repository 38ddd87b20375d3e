#pragma once

// Binary sample file:
//
//   offset  size  field
//   0       4     magic "ISBP"
//   4       2     version (u16 LE, currently 1)
//   6       1     label (u8, 1..7)
//   7       4     S (u32 LE)
//   11      4     C (u32 LE)
//   15      24 S  P_tv, row-major float32 LE (6 rows of S values)
//   ..      24 C  P_uv, row-major float32 LE (6 rows of C values)
//
// A header for S = 880, C = 220, label 3 reads
//   49 53 42 50 01 00 03 70 03 00 00 dc 00 00 00

#include "isbp/phys_info.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace isbp {

inline constexpr std::uint16_t kSampleFormatVersion = 1;
inline constexpr std::size_t kSampleHeaderBytes = 15;

/// Sample contents exactly as stored (single precision).
struct SampleRecord {
    using Matrix = Eigen::Matrix<float, 6, Eigen::Dynamic>;

    int label = 0;
    Matrix tv;
    Matrix uv;

    static SampleRecord from(int label, const PhysInfoMatrix& tv, const PhysInfoMatrix& uv);

    bool operator==(const SampleRecord& o) const {
        return label == o.label && tv.cols() == o.tv.cols() && uv.cols() == o.uv.cols() && tv == o.tv &&
               uv == o.uv;
    }
};

std::vector<std::uint8_t> encode_sample(const SampleRecord& s);

/// Throws FormatError (with byte offset) on bad magic, version, label, or length.
SampleRecord decode_sample(const std::vector<std::uint8_t>& bytes);

void write_sample(const std::filesystem::path& path, const SampleRecord& s);
SampleRecord read_sample(const std::filesystem::path& path);

} // namespace isbp
