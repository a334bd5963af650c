#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xq/position.hpp"

namespace xq::data {

// On-disk layout (little-endian): "NQD1", u32 version, u64 record count, then
// fixed 93-byte records: 90 piece codes in square order (a0..i9), side to move
// (0 Red, 1 Black), i16 label in centipawns relative to the side to move.
inline constexpr std::array<char, 4> kDatasetMagic = {'N', 'Q', 'D', '1'};
inline constexpr std::uint32_t kDatasetVersion = 1;
inline constexpr std::size_t kDatasetHeaderBytes = 16;
inline constexpr std::size_t kRecordBytes = 93;

struct DatasetRecord {
    std::array<std::uint8_t, kSquares> board{};
    std::uint8_t side = 0;
    std::int16_t label = 0;

    friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

DatasetRecord pack(const Position& p, Score label = 0);

// Throws InputError if the packed position violates board invariants.
Position unpack(const DatasetRecord& r);

// 128-bit identity of the packed position (board + side), label excluded.
struct PositionKey {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;
    friend bool operator==(const PositionKey&, const PositionKey&) = default;
};
PositionKey position_key(const DatasetRecord& r);

struct PositionKeyHash {
    std::size_t operator()(const PositionKey& k) const { return static_cast<std::size_t>(k.hi ^ (k.lo * 0x9E3779B97F4A7C15ULL)); }
};

void write_dataset(std::span<const DatasetRecord> records, const std::filesystem::path& path);

// Validates magic, version, size and every packed position; throws InputError.
std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);

}  // namespace xq::data
