#pragma once

#include <array>
#include <cstdint>

#include "xq/types.hpp"

namespace xq::detail {

// A target square plus the square that must be empty to reach it
// (horse leg or elephant eye); via < 0 when unused.
struct Step {
    std::int8_t to;
    std::int8_t via;
};

template <int N>
struct StepList {
    std::array<Step, N> steps{};
    int size = 0;
    void push(int to, int via) { steps[size++] = {static_cast<std::int8_t>(to), static_cast<std::int8_t>(via)}; }
    const Step* begin() const { return steps.data(); }
    const Step* end() const { return steps.data() + size; }
};

enum Direction { North = 0, South = 1, East = 2, West = 3 };

struct Ray {
    std::array<std::int8_t, 9> squares{};
    int size = 0;
    const std::int8_t* begin() const { return squares.data(); }
    const std::int8_t* end() const { return squares.data() + size; }
};

struct Geometry {
    std::array<std::array<Ray, 4>, kSquares> rays;
    std::array<StepList<8>, kSquares> horse;
    // Squares a horse may attack *from*, with the leg that must be empty.
    std::array<StepList<8>, kSquares> horse_attackers;
    std::array<std::array<StepList<4>, kSquares>, 2> elephant;
    std::array<std::array<StepList<4>, kSquares>, 2> advisor;
    std::array<std::array<StepList<4>, kSquares>, 2> king;
    std::array<std::array<StepList<3>, kSquares>, 2> pawn;
    // pawn_attackers[c][s]: squares from which a pawn of color c reaches s.
    std::array<std::array<StepList<3>, kSquares>, 2> pawn_attackers;
};

const Geometry& geometry();

}  // namespace xq::detail
