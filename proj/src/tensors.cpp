#include "igtk/tensors.hpp"

#include <algorithm>
#include <array>

namespace igtk {

// Each orbit average is computed once and the same double assigned to every
// index position in the orbit, so the outputs are bitwise symmetric.

Tensor3 symmetrize_full(const Tensor3& t) {
    const int d = t.dim();
    Tensor3 out(d);
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b)
            for (int c = b; c < d; ++c) {
                const double avg = (t(a, b, c) + t(a, c, b) + t(b, a, c) + t(b, c, a) +
                                    t(c, a, b) + t(c, b, a)) /
                                   6.0;
                std::array<int, 3> p = {a, b, c};
                do {
                    out(p[0], p[1], p[2]) = avg;
                } while (std::next_permutation(p.begin(), p.end()));
            }
    return out;
}

Tensor4 symmetrize_full(const Tensor4& t) {
    const int d = t.dim();
    Tensor4 out(d);
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b)
            for (int c = b; c < d; ++c)
                for (int e = c; e < d; ++e) {
                    const std::array<int, 4> idx = {a, b, c, e};
                    std::array<int, 4> p = {0, 1, 2, 3};
                    double acc = 0.0;
                    do {
                        acc += t(idx[p[0]], idx[p[1]], idx[p[2]], idx[p[3]]);
                    } while (std::next_permutation(p.begin(), p.end()));
                    const double avg = acc / 24.0;
                    std::array<int, 4> q = {a, b, c, e};
                    do {
                        out(q[0], q[1], q[2], q[3]) = avg;
                    } while (std::next_permutation(q.begin(), q.end()));
                }
    return out;
}

Tensor3 symmetrize_pair12(const Tensor3& t) {
    const int d = t.dim();
    Tensor3 out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const double avg = 0.5 * (t(i, j, k) + t(j, i, k));
                out(i, j, k) = avg;
                out(j, i, k) = avg;
            }
    return out;
}

Tensor4 symmetrize_pairs(const Tensor4& t) {
    const int d = t.dim();
    Tensor4 out(d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = k; l < d; ++l) {
                    const double avg =
                        0.25 * (t(i, j, k, l) + t(j, i, k, l) + t(i, j, l, k) + t(j, i, l, k));
                    out(i, j, k, l) = avg;
                    out(j, i, k, l) = avg;
                    out(i, j, l, k) = avg;
                    out(j, i, l, k) = avg;
                }
    return out;
}

Tensor4 symmetrize_pairs_and_swap(const Tensor4& t) {
    const int d = t.dim();
    const Tensor4 p = symmetrize_pairs(t);
    Tensor4 out(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                for (int l = 0; l < d; ++l)
                    out(i, j, k, l) = 0.5 * (p(i, j, k, l) + p(k, l, i, j));
    return out;
}

}  // namespace igtk
