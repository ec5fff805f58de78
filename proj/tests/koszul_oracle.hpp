#pragma once

#include <vector>

#include "bflow/bracket.hpp"

namespace bflow::test {

// Independent Ricci oracle from the Koszul formula in an orthonormal frame:
// nabla_x y = (1/2) mu(x,y) - (1/2)(ad_x^t y + ad_y^t x), then
// R(x,y)z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_{mu(x,y)} z and
// ric(x,y) = sum_i <R(e_i,x)y, e_i>.
inline Matrix koszul_ricci(const LieBracket& mu) {
    const int d = mu.dim();
    std::vector<Matrix> adt(d), nabla(d);
    for (int i = 0; i < d; ++i) adt[i] = mu.ad_basis(i).transpose();
    for (int i = 0; i < d; ++i) {
        Matrix m(d, d);
        for (int j = 0; j < d; ++j)
            m.col(j) = 0.5 * mu.ad_basis(i).col(j) - 0.5 * adt[i].col(j) -
                       0.5 * adt[j].col(i);
        nabla[i] = m;
    }
    auto nabla_vec = [&](const Vector& x, const Vector& y) {
        Vector out = Vector::Zero(d);
        for (int m = 0; m < d; ++m) out += x(m) * (nabla[m] * y);
        return out;
    };
    Matrix ric = Matrix::Zero(d, d);
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < d; ++y) {
            double s = 0.0;
            for (int i = 0; i < d; ++i) {
                Vector yv = Vector::Unit(d, y);
                Vector v = nabla[i] * (nabla[x] * yv) - nabla[x] * (nabla[i] * yv);
                v -= nabla_vec(mu.ad_basis(i).col(x), yv);
                s += v(i);
            }
            ric(x, y) = s;
        }
    return ric;
}

}  // namespace bflow::test
