#include "xq/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace xq::data {

namespace {

template <typename T>
void put_le(std::string& out, T value) {
    auto v = static_cast<std::make_unsigned_t<T>>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>(v & 0xFF));
        v = static_cast<decltype(v)>(v >> 8);
    }
}

template <typename T>
T get_le(const unsigned char* p) {
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) v = static_cast<decltype(v)>((v << 8) | p[i]);
    return static_cast<T>(v);
}

}  // namespace

DatasetRecord pack(const Position& p, Score label) {
    DatasetRecord r;
    for (Square s = 0; s < kSquares; ++s) r.board[s] = static_cast<std::uint8_t>(code_of(p.at(s)));
    r.side = p.side_to_move() == Color::Red ? 0 : 1;
    r.label = static_cast<std::int16_t>(std::clamp(label, -32768, 32767));
    return r;
}

Position unpack(const DatasetRecord& r) {
    Position p;
    for (Square s = 0; s < kSquares; ++s) {
        if (!valid_piece_code(r.board[s]))
            throw InputError("invalid piece code " + std::to_string(r.board[s]) + " at square " + std::to_string(s));
        p.set_piece(s, Piece{r.board[s]});
    }
    if (r.side > 1) throw InputError("invalid side-to-move byte " + std::to_string(r.side));
    p.set_side_to_move(r.side == 0 ? Color::Red : Color::Black);
    p.set_ply(r.side);
    p.refresh();
    if (auto why = validate(p)) throw InputError("illegal packed position: " + *why);
    return p;
}

PositionKey position_key(const DatasetRecord& r) {
    // Two independent 64-bit hashes over the 91 position bytes.
    std::uint64_t a = 0xCBF29CE484222325ULL;
    std::uint64_t b = 0x84222325CBF29CE4ULL;
    auto mix = [&](std::uint8_t byte) {
        a = (a ^ byte) * 0x100000001B3ULL;
        b = (b + byte + 1) * 0x9E3779B97F4A7C15ULL;
        b ^= b >> 29;
    };
    for (std::uint8_t c : r.board) mix(c);
    mix(r.side);
    return {a, b};
}

void write_dataset(std::span<const DatasetRecord> records, const std::filesystem::path& path) {
    std::string out;
    out.reserve(kDatasetHeaderBytes + records.size() * kRecordBytes);
    out.append(kDatasetMagic.data(), kDatasetMagic.size());
    put_le<std::uint32_t>(out, kDatasetVersion);
    put_le<std::uint64_t>(out, records.size());
    for (const DatasetRecord& r : records) {
        out.append(reinterpret_cast<const char*>(r.board.data()), r.board.size());
        out.push_back(static_cast<char>(r.side));
        put_le<std::int16_t>(out, r.label);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + path.string() + " for writing");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw InputError("write failed: " + path.string());
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open dataset " + path.string());
    const std::string bytes{std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::string where = path.string() + ": ";

    if (bytes.size() < kDatasetHeaderBytes) throw InputError(where + "truncated header (" + std::to_string(bytes.size()) + " bytes)");
    if (std::memcmp(raw, kDatasetMagic.data(), 4) != 0) throw InputError(where + "bad magic, not an NQD1 dataset");
    const auto version = get_le<std::uint32_t>(raw + 4);
    if (version != kDatasetVersion)
        throw InputError(where + "unsupported version " + std::to_string(version) + " (expected " + std::to_string(kDatasetVersion) + ")");
    const auto count = get_le<std::uint64_t>(raw + 8);

    const std::size_t body = bytes.size() - kDatasetHeaderBytes;
    const std::uint64_t complete = body / kRecordBytes;
    if (complete < count) {
        const std::size_t offset = kDatasetHeaderBytes + complete * kRecordBytes;
        throw InputError(where + "truncated record " + std::to_string(complete) + " at byte offset " + std::to_string(offset) +
                         " (header declares " + std::to_string(count) + " records)");
    }
    if (body != count * kRecordBytes)
        throw InputError(where + "trailing bytes after " + std::to_string(count) + " records at byte offset " +
                         std::to_string(kDatasetHeaderBytes + count * kRecordBytes));

    std::vector<DatasetRecord> records(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* p = raw + kDatasetHeaderBytes + i * kRecordBytes;
        DatasetRecord& r = records[i];
        std::memcpy(r.board.data(), p, kSquares);
        r.side = p[90];
        r.label = get_le<std::int16_t>(p + 91);
        try {
            unpack(r);
        } catch (const InputError& e) {
            throw InputError(where + "record " + std::to_string(i) + " at byte offset " +
                             std::to_string(kDatasetHeaderBytes + i * kRecordBytes) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace xq::data
