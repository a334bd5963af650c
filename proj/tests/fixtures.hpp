#pragma once

// Quiet-filter fixtures: one position per verdict under the default margins.

namespace fixtures {

// Black to move, in check from the rook on e1.
constexpr const char* kCheckFen = "4k4/9/9/9/9/9/9/9/4R4/3K5 b";
constexpr const char* kHangingRookFen = "3k5/9/9/9/3r5/9/2N6/9/9/4K4 w";
// Nc5-d7+ forks the e9 king and the b6 rook; nothing can be captured at once.
constexpr const char* kForkFen = "4k4/9/9/1r7/2N6/9/9/9/4A4/4K4 w";
// Cannon-for-horse trades on the b and h files are the only captures.
constexpr const char* kQuietFen = "rnbakabnr/9/1c5c1/p1p1p1p1p/9/9/P1P1P1P1P/1C5C1/9/RNBAKABNR w";

}  // namespace fixtures
