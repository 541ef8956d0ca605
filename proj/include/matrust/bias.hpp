#pragma once

#include "matrust/trust_core.hpp"

namespace matrust {

/// Global mean rating, per-trustor and per-trustee mean offsets.
///
/// x(i) is the mean of the ratings i gave minus mu, y(j) the mean of the
/// ratings j received minus mu. Users with no out-edges (in-edges) get
/// x(i) = 0 (y(j) = 0). Sums run in index order, so the result is
/// bit-reproducible. Throws ValidationError when T has no observations.
BiasTerms compute_bias(const SparseTrustMatrix& t);

}  // namespace matrust
