#include "matrust/bias.hpp"

namespace matrust {

BiasTerms compute_bias(const SparseTrustMatrix& t) {
  if (t.empty()) throw ValidationError("cannot compute bias of an empty trust matrix");
  const auto n = t.num_users();
  const auto obs = t.observations();

  double total = 0.0;
  for (const auto& o : obs) total += o.rating;

  BiasTerms b = BiasTerms::zeros(n);
  b.mu = total / static_cast<double>(obs.size());

  for (UserIndex i = 0; i < n; ++i) {
    const auto row = t.row(i);
    if (row.empty()) continue;
    double s = 0.0;
    for (const auto& o : row) s += o.rating;
    b.x[i] = s / static_cast<double>(row.size()) - b.mu;
  }
  for (UserIndex j = 0; j < n; ++j) {
    const auto col = t.column(j);
    if (col.empty()) continue;
    double s = 0.0;
    for (auto k : col) s += obs[k].rating;
    b.y[j] = s / static_cast<double>(col.size()) - b.mu;
  }
  return b;
}

}  // namespace matrust
