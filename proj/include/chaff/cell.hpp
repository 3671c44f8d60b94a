// Copyright (c) the chaffsim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdlib>

namespace chaff {

// Grid cell; one sensor node monitors one cell.
struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell& a, const Cell& b) {
        return a.x == b.x && a.y == b.y;
    }
    friend bool operator!=(const Cell& a, const Cell& b) { return !(a == b); }
};

inline int manhattan(const Cell& a, const Cell& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y);
}

inline std::int64_t squared_distance(const Cell& a, const Cell& b) {
    const std::int64_t dx = a.x - b.x;
    const std::int64_t dy = a.y - b.y;
    return dx * dx + dy * dy;
}

// Row-major index; doubles as the node id of the cell's sensor.
inline std::uint32_t cell_index(const Cell& c, int side) {
    return static_cast<std::uint32_t>(c.y) * static_cast<std::uint32_t>(side) +
           static_cast<std::uint32_t>(c.x);
}

inline Cell cell_at(std::uint32_t index, int side) {
    return Cell{static_cast<int>(index % static_cast<std::uint32_t>(side)),
                static_cast<int>(index / static_cast<std::uint32_t>(side))};
}

}  // namespace chaff
