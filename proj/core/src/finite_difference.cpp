#include "dgpinn/finite_difference.hpp"

#include "dgpinn/errors.hpp"

namespace dgpinn {

Vector fd_gradient(const ScalarFunction& f, const Vector& at, double step) {
  if (!(step > 0.0)) throw ContractError("finite-difference step must be positive");
  Vector g(at.size());
  Vector probe = at;
  for (Index i = 0; i < at.size(); ++i) {
    probe(i) = at(i) + step;
    const double up = f(probe);
    probe(i) = at(i) - step;
    const double down = f(probe);
    probe(i) = at(i);
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace dgpinn
