#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace pintflow {

/// Uniform quadrilateral grid on [-1,1]^2 with (2^level)^2 square cells.
/// Node numbering is lexicographic with x1 running fastest, so node
/// (i1, i2) has index i2 * per_side + i1.
struct UniformGrid {
    int level = 0;
    std::size_t cells_per_side = 0;
    double h = 0.0;

    std::size_t num_cells() const { return cells_per_side * cells_per_side; }
    std::size_t q2_per_side() const { return 2 * cells_per_side + 1; }
    std::size_t q1_per_side() const { return cells_per_side + 1; }
    std::size_t num_q2_nodes() const { return q2_per_side() * q2_per_side(); }
    std::size_t num_q1_nodes() const { return q1_per_side() * q1_per_side(); }

    std::array<double, 2> q2_coord(std::size_t node) const {
        const std::size_t n = q2_per_side();
        return {-1.0 + 0.5 * h * static_cast<double>(node % n), -1.0 + 0.5 * h * static_cast<double>(node / n)};
    }
    std::array<double, 2> q1_coord(std::size_t node) const {
        const std::size_t n = q1_per_side();
        return {-1.0 + h * static_cast<double>(node % n), -1.0 + h * static_cast<double>(node / n)};
    }
    bool q2_on_boundary(std::size_t node) const {
        const std::size_t n = q2_per_side();
        const std::size_t i1 = node % n, i2 = node / n;
        return i1 == 0 || i2 == 0 || i1 == n - 1 || i2 == n - 1;
    }
    /// Lower-left corner of a cell.
    std::array<double, 2> cell_origin(std::size_t cell) const {
        return {-1.0 + h * static_cast<double>(cell % cells_per_side),
                -1.0 + h * static_cast<double>(cell / cells_per_side)};
    }
    /// Local numbering a + 3 b, a the x1 offset and b the x2 offset.
    std::array<std::size_t, 9> q2_cell_nodes(std::size_t cell) const {
        const std::size_t cx = cell % cells_per_side, cy = cell / cells_per_side;
        const std::size_t n = q2_per_side();
        std::array<std::size_t, 9> out{};
        for (std::size_t b = 0; b < 3; ++b)
            for (std::size_t a = 0; a < 3; ++a) out[a + 3 * b] = (2 * cy + b) * n + 2 * cx + a;
        return out;
    }
    /// Local numbering a + 2 b.
    std::array<std::size_t, 4> q1_cell_nodes(std::size_t cell) const {
        const std::size_t cx = cell % cells_per_side, cy = cell / cells_per_side;
        const std::size_t n = q1_per_side();
        std::array<std::size_t, 4> out{};
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t a = 0; a < 2; ++a) out[a + 2 * b] = (cy + b) * n + cx + a;
        return out;
    }
};

/// Nested sequence of uniform grids, coarsest first.
class MeshHierarchy {
public:
    MeshHierarchy(int coarsest, int finest);

    int coarsest_level() const noexcept { return coarsest_; }
    int finest_level() const noexcept { return finest_; }
    std::size_t num_levels() const noexcept { return grids_.size(); }
    const UniformGrid& grid(int level) const;
    const UniformGrid& finest() const { return grids_.back(); }

private:
    int coarsest_;
    int finest_;
    std::vector<UniformGrid> grids_;
};

inline constexpr int kMaxLevel = 8;

/// Requires 1 <= coarsest <= finest <= kMaxLevel, otherwise ConfigError.
MeshHierarchy build_hierarchy(int coarsest_level, int finest_level);

}  // namespace pintflow
