#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace xq {

// Counter-based seed splitter: independent streams per (root seed, stage, index).
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stage, std::uint64_t index = 0) {
    std::uint64_t z = root ^ (stage * 0x9E3779B97F4A7C15ULL) ^ (index * 0xD1B54A32D192ED03ULL);
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed stages, one per pipeline step.
enum class Stage : std::uint64_t { Selfplay = 1, Balance = 2, TrainSplit = 3, TrainInit = 4, TrainShuffle = 5, Match = 6 };

inline std::uint64_t derive_seed(std::uint64_t root, Stage stage, std::uint64_t index = 0) {
    return derive_seed(root, static_cast<std::uint64_t>(stage), index);
}

// mt19937_64 output is fully specified by the standard; the bounded draws
// below avoid the implementation-defined std distributions so results are
// identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform in [0, n), n > 0, by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do x = engine_();
        while (x >= limit);
        return x % n;
    }

    // Uniform in [0, 1) with 53 bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[below(i)]);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace xq
