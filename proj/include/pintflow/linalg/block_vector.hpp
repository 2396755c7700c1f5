#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pintflow/errors.hpp"
#include "pintflow/linalg/scalar.hpp"

namespace pintflow {

/// The four unknown fields of the optimality system.
enum class Field { v = 0, p = 1, lambda = 2, mu = 3 };

inline constexpr std::array<Field, 4> kAllFields = {Field::v, Field::p, Field::lambda, Field::mu};

/// Field-major layout: all v blocks, all p blocks, all lambda blocks, all mu
/// blocks; each field stores its time blocks contiguously.
struct BlockLayout {
    std::size_t blocks = 0;  // n_t - 1
    std::size_t nv = 0;
    std::size_t np = 0;

    std::size_t field_size(Field f) const {
        return blocks * ((f == Field::v || f == Field::lambda) ? nv : np);
    }
    std::size_t dof_size(Field f) const { return (f == Field::v || f == Field::lambda) ? nv : np; }
    std::size_t field_offset(Field f) const {
        switch (f) {
            case Field::v: return 0;
            case Field::p: return blocks * nv;
            case Field::lambda: return blocks * (nv + np);
            case Field::mu: return blocks * (2 * nv + np);
        }
        return 0;
    }
    /// N = 2 (n_t - 1)(n_v + n_p)
    std::size_t size() const { return 2 * blocks * (nv + np); }
    /// Length of one time block of the block-diagonal system (v, lambda, p, mu).
    std::size_t block_system_size() const { return 2 * (nv + np); }

    friend bool operator==(const BlockLayout&, const BlockLayout&) = default;
};

template <class T>
class BlockVector {
public:
    BlockVector() = default;
    explicit BlockVector(BlockLayout layout) : layout_(layout), data_(layout.size(), T{}) {}
    BlockVector(BlockLayout layout, std::vector<T> data) : layout_(layout), data_(std::move(data)) {
        if (data_.size() != layout_.size()) throw UsageError("BlockVector: data size does not match layout");
    }

    const BlockLayout& layout() const noexcept { return layout_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<T> field(Field f) {
        return std::span<T>(data_).subspan(layout_.field_offset(f), layout_.field_size(f));
    }
    std::span<const T> field(Field f) const {
        return std::span<const T>(data_).subspan(layout_.field_offset(f), layout_.field_size(f));
    }
    std::span<T> block(Field f, std::size_t j) {
        const std::size_t n = layout_.dof_size(f);
        return field(f).subspan(j * n, n);
    }
    std::span<const T> block(Field f, std::size_t j) const {
        const std::size_t n = layout_.dof_size(f);
        return field(f).subspan(j * n, n);
    }

    std::span<T> span() { return data_; }
    std::span<const T> span() const { return data_; }
    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

private:
    BlockLayout layout_{};
    std::vector<T> data_;
};

/// Raw little-endian dump: 8-byte magic, three uint64 (blocks, nv, np), one
/// uint64 scalar tag (0 real, 1 complex), then the values.
void write_block_vector(const std::string& path, const BlockVector<real>& x);
void write_block_vector(const std::string& path, const BlockVector<complex>& x);
BlockVector<real> read_block_vector_real(const std::string& path);
BlockVector<complex> read_block_vector_complex(const std::string& path);

}  // namespace pintflow
