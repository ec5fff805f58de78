#pragma once

#include <string>
#include <vector>

#include "bflow/hermitian.hpp"

namespace bflow {

/// A named bracket together with its canonical compatible (omega, g, J).
/// All fixtures use g = identity, so J is read off the form matrix.
struct Fixture {
    std::string name;
    LieBracket mu;
    HermitianTriple triple;
    std::vector<std::string> params;  // family parameter names, empty if rigid
};

Fixture fixture_abelian();                       // dim 4, zero bracket
Fixture fixture_aff(double a = 1.0);             // dim 2, [e1,e2] = a e2
Fixture fixture_n4(double a = 1.0, double b = 1.0);    // dim 4, 3-step nilpotent
Fixture fixture_anna(double a = 1.0, double b = 1.0);  // dim 4, solvable non-unimodular
Fixture fixture_h3h3(double a = 1.0, double b = 1.0);  // dim 6, 2-step nilpotent product
Fixture fixture_product();                       // dim 6, aff(R) x aff(C)

const std::vector<std::string>& fixture_names();

/// Catalog lookup. `params` must be empty or match the family arity.
Fixture fixture_by_name(const std::string& name, const std::vector<double>& params = {});

}  // namespace bflow
