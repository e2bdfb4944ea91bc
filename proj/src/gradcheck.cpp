#include "began/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "began/error.hpp"

namespace began {

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x,
                         double h) {
    if (h <= 0.0) throw ArgumentError("finite_diff_check requires h > 0");

    Tensor probe = x.clone();
    probe.set_requires_grad(true);
    {
        Tape tape;
        Tensor loss = f(probe);
        tape.backward(loss);
    }
    std::vector<double> analytic = probe.grad();
    if (analytic.empty()) analytic.assign(x.size(), 0.0);

    Tensor work = x.clone();
    double worst = 0.0;
    for (int64_t i = 0; i < work.size(); ++i) {
        const double saved = work.data()[i];
        work.data()[i] = saved + h;
        const double up = f(work).item();
        work.data()[i] = saved - h;
        const double down = f(work).item();
        work.data()[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    return worst;
}

}  // namespace began
