#pragma once

#include "matrust/trust_core.hpp"

namespace matrust::fixtures {

// Five users, 0-based: Alice, Bob, Carol, David, Elva.
enum : UserIndex { kAlice = 0, kBob = 1, kCarol = 2, kDavid = 3, kElva = 4 };

/// The partially observed 5 x 5 example matrix: Alice trusts everyone fully,
/// Bob/David/Elva rate Alice 0.5, Bob->Carol, Carol->Bob and Elva->David are 1.
inline SparseTrustMatrix example_matrix() {
  return SparseTrustMatrix(5, {{kAlice, kBob, 1.0},
                               {kAlice, kCarol, 1.0},
                               {kAlice, kDavid, 1.0},
                               {kAlice, kElva, 1.0},
                               {kBob, kAlice, 0.5},
                               {kBob, kCarol, 1.0},
                               {kCarol, kBob, 1.0},
                               {kDavid, kAlice, 0.5},
                               {kElva, kAlice, 0.5},
                               {kElva, kDavid, 1.0}},
                           {"Alice", "Bob", "Carol", "David", "Elva"});
}

/// The two-factor stereotypes inferred for the example, as a bias-free model.
inline FactorModel example_model() {
  FactorModel m;
  m.F0.resize(5, 2);
  m.F0 << 1, 1,  //
      1, 0,      //
      1, 0,      //
      0, 1,      //
      0, 1;
  m.G0.resize(5, 2);
  m.G0 << 0.5, 0.5,  //
      1, 0,          //
      1, 0,          //
      0, 1,          //
      0, 1;
  m.alpha = Coefficients::Zero();
  m.bias = BiasTerms::zeros(5);
  m.labels = {"Alice", "Bob", "Carol", "David", "Elva"};
  return m;
}

}  // namespace matrust::fixtures
