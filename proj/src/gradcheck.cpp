#include "srl/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace srl::num {

double finite_diff_check(const std::function<Val(Tape&)>& build,
                         const std::vector<Tensor*>& params, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("finite_diff_check: eps must be positive");

  std::vector<Tensor> analytic;
  {
    Tape tape;
    Val loss = build(tape);
    tape.backward(loss);
    for (Tensor* p : params) {
      const Tensor* g = tape.grad_of(*p);
      analytic.push_back(g ? *g : Tensor(p->shape()));
    }
  }

  auto eval = [&]() {
    Tape tape;
    return tape.value(build(tape)).value();
  };

  double worst = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& p = *params[pi];
    for (Index c = 0; c < p.size(); ++c) {
      const double saved = p.array()(c);
      p.array()(c) = saved + eps;
      const double fp = eval();
      p.array()(c) = saved - eps;
      const double fm = eval();
      p.array()(c) = saved;
      const double fd = (fp - fm) / (2.0 * eps);
      const double a = analytic[pi].array()(c);
      const double err = std::abs(a - fd) / (std::abs(a) + 1e-8);
      if (err > worst) worst = err;
    }
  }
  return worst;
}

}  // namespace srl::num
