#include "pintflow/linalg/block_vector.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace pintflow {
namespace {

static_assert(std::endian::native == std::endian::little,
              "block vector dumps assume a little-endian host");

constexpr char kMagic[8] = {'P', 'F', 'B', 'V', '0', '0', '0', '1'};

template <class T>
void write_impl(const std::string& path, const BlockVector<T>& x) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open " + path + " for writing");
    const std::uint64_t header[4] = {x.layout().blocks, x.layout().nv, x.layout().np,
                                     is_complex_v<T> ? 1u : 0u};
    os.write(kMagic, sizeof kMagic);
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    os.write(reinterpret_cast<const char*>(x.data().data()),
             static_cast<std::streamsize>(x.size() * sizeof(T)));
    if (!os) throw InputError("write failed: " + path);
}

template <class T>
BlockVector<T> read_impl(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open " + path);
    char magic[8];
    std::uint64_t header[4];
    is.read(magic, sizeof magic);
    is.read(reinterpret_cast<char*>(header), sizeof header);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw InputError("not a block vector dump: " + path);
    if (header[3] != (is_complex_v<T> ? 1u : 0u)) throw InputError("scalar type mismatch in " + path);
    BlockLayout layout{header[0], header[1], header[2]};
    std::vector<T> data(layout.size());
    is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(T)));
    if (!is) throw InputError("truncated block vector dump: " + path);
    return BlockVector<T>(layout, std::move(data));
}

}  // namespace

void write_block_vector(const std::string& path, const BlockVector<real>& x) { write_impl(path, x); }
void write_block_vector(const std::string& path, const BlockVector<complex>& x) { write_impl(path, x); }
BlockVector<real> read_block_vector_real(const std::string& path) { return read_impl<real>(path); }
BlockVector<complex> read_block_vector_complex(const std::string& path) { return read_impl<complex>(path); }

}  // namespace pintflow
