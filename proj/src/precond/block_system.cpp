#include "pintflow/precond/block_system.hpp"

namespace pintflow {

void apply_block_G(const DiscreteOperators& o, complex d, double tau, double beta, std::span<const complex> x,
                   std::span<complex> y) {
    const BlockOffsets b{o.n_v, o.n_p};
    if (x.size() != b.size() || y.size() != b.size()) throw UsageError("apply_block_G: size mismatch");
    const auto x1 = x.subspan(b.v(), o.n_v), x2 = x.subspan(b.lambda(), o.n_v);
    const auto x3 = x.subspan(b.p(), o.n_p), x4 = x.subspan(b.mu(), o.n_p);
    auto y1 = y.subspan(b.v(), o.n_v), y2 = y.subspan(b.lambda(), o.n_v);
    auto y3 = y.subspan(b.p(), o.n_p), y4 = y.subspan(b.mu(), o.n_p);
    std::vector<complex> Mx1(o.n_v), Mx2(o.n_v);
    o.M.multiply<complex, complex>(x1, Mx1);
    o.M.multiply<complex, complex>(x2, Mx2);

    o.Lt.multiply<complex, complex>(x2, y1);
    o.Bt.multiply_add<complex, complex>(1.0, x4, y1);
    for (std::size_t i = 0; i < o.n_v; ++i) y1[i] = tau * (Mx1[i] + y1[i]) + std::conj(d) * Mx2[i];

    o.L.multiply<complex, complex>(x1, y2);
    o.Bt.multiply_add<complex, complex>(1.0, x3, y2);
    for (std::size_t i = 0; i < o.n_v; ++i) y2[i] = tau * y2[i] + d * Mx1[i] - (tau / beta) * Mx2[i];

    o.B.multiply<complex, complex>(x2, y3);
    o.B.multiply<complex, complex>(x1, y4);
    for (auto& v : y3) v *= tau;
    for (auto& v : y4) v *= tau;
}

}  // namespace pintflow
