#include "ctsid/expm.hpp"

#include <cmath>
#include <stdexcept>

namespace ctsid {
namespace {

// Evaluate the order-q diagonal Pade approximant r(M) = (V-U)^{-1}(V+U) with
// U odd / V even in M, then return it.
Eigen::MatrixXd pade_solve(const Eigen::MatrixXd& U, const Eigen::MatrixXd& V) {
    return (V - U).partialPivLu().solve(V + U);
}

Eigen::MatrixXd pade_low(const Eigen::MatrixXd& M, const double* b, int q) {
    const Eigen::Index n = M.rows();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd M2 = M * M;
    Eigen::MatrixXd Ueven = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd P = I;  // M^(2k)
    for (int k = 0; 2 * k <= q; ++k) {
        V += b[2 * k] * P;
        if (2 * k + 1 <= q) Ueven += b[2 * k + 1] * P;
        if (2 * (k + 1) <= q) P = P * M2;
    }
    return pade_solve(M * Ueven, V);
}

}  // namespace

Eigen::MatrixXd expm(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw std::runtime_error("expm: matrix must be square");
    if (!M.allFinite()) throw std::runtime_error("expm: non-finite input");

    static const double b3[] = {120, 60, 12, 1};
    static const double b5[] = {30240, 15120, 3360, 420, 30, 1};
    static const double b7[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    static const double b9[] = {17643225600, 8821612800, 2075673600, 302702400, 30270240,
                                2162160, 110880, 3960, 90, 1};
    static const double b13[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0, 129060195264000.0, 10559470521600.0,
                                 670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
                                 960960.0, 16380.0, 182.0, 1.0};

    const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
    Eigen::MatrixXd R;
    if (norm1 <= 1.495585217958292e-2) {
        R = pade_low(M, b3, 3);
    } else if (norm1 <= 2.539398330063230e-1) {
        R = pade_low(M, b5, 5);
    } else if (norm1 <= 9.504178996162932e-1) {
        R = pade_low(M, b7, 7);
    } else if (norm1 <= 2.097847961257068) {
        R = pade_low(M, b9, 9);
    } else {
        const double theta13 = 5.371920351148152;
        int s = 0;
        if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        if (s > 1023) throw std::runtime_error("expm: norm too large, scaling overflows");
        const Eigen::MatrixXd A = M / std::ldexp(1.0, s);
        const Eigen::Index n = A.rows();
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd A2 = A * A;
        const Eigen::MatrixXd A4 = A2 * A2;
        const Eigen::MatrixXd A6 = A2 * A4;
        const Eigen::MatrixXd U =
            A * (A6 * (b13[13] * A6 + b13[11] * A4 + b13[9] * A2) + b13[7] * A6 + b13[5] * A4 +
                 b13[3] * A2 + b13[1] * I);
        const Eigen::MatrixXd V = A6 * (b13[12] * A6 + b13[10] * A4 + b13[8] * A2) + b13[6] * A6 +
                                  b13[4] * A4 + b13[2] * A2 + b13[0] * I;
        R = pade_solve(U, V);
        for (int i = 0; i < s; ++i) R = R * R;
    }
    if (!R.allFinite()) throw std::runtime_error("expm: overflow (non-finite result)");
    return R;
}

}  // namespace ctsid
