#include "nouk/oracle.hpp"

#include "nouk/error.hpp"

#include <bit>
#include <cmath>

namespace nouk::oracle {

namespace {

// Each element of `remaining` is either left unpaired or paired with a later one.
double expand(std::span<const double> values, const Eigen::MatrixXd& pairing, unsigned remaining)
{
    if (remaining == 0) return 1.0;
    const int first = std::countr_zero(remaining);
    const unsigned rest = remaining & ~(1u << first);
    double total = values[static_cast<std::size_t>(first)] * expand(values, pairing, rest);
    for (unsigned others = rest; others; others &= others - 1) {
        const int j = std::countr_zero(others);
        total -= pairing(first, j) * expand(values, pairing, rest & ~(1u << j));
    }
    return total;
}

}  // namespace

double in_pairing_expansion(std::span<const double> values, const Eigen::MatrixXd& pairing,
                            unsigned mask)
{
    if (std::popcount(mask) > 8) fail(ErrorKind::UnsupportedOrder, "pairing oracle is limited to n <= 8");
    return expand(values, pairing, mask);
}

double gaussian_pdf_ratio(const Eigen::MatrixXd& q, const Eigen::VectorXd& h,
                          const Eigen::VectorXd& y)
{
    const Eigen::LLT<Eigen::MatrixXd> llt(q);
    if (llt.info() != Eigen::Success) fail(ErrorKind::RankDeficient, "oracle needs a positive-definite Q");
    const Eigen::VectorXd shifted = llt.matrixL().solve(y - h);
    const Eigen::VectorXd centred = llt.matrixL().solve(y);
    return std::exp(-0.5 * shifted.squaredNorm() + 0.5 * centred.squaredNorm());
}

}  // namespace nouk::oracle
