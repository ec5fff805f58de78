#include "bflow/fixtures.hpp"

#include <utility>

namespace bflow {

namespace {

HermitianTriple pairs_triple(int d, std::initializer_list<std::pair<int, int>> pairs) {
    Matrix w = Matrix::Zero(d, d);
    for (const auto& p : pairs) {
        w(p.first - 1, p.second - 1) = 1.0;
        w(p.second - 1, p.first - 1) = -1.0;
    }
    return triple_from_pair(w, Matrix::Identity(d, d));
}

}  // namespace

Fixture fixture_abelian() {
    Fixture f;
    f.name = "abelian";
    f.mu = LieBracket(4);
    f.triple = pairs_triple(4, {{1, 2}, {3, 4}});
    return f;
}

Fixture fixture_aff(double a) {
    Fixture f;
    f.name = "aff";
    f.mu = LieBracket(2);
    f.mu.set(0, 1, 1, a);
    f.triple = pairs_triple(2, {{1, 2}});
    return f;
}

Fixture fixture_n4(double a, double b) {
    Fixture f;
    f.name = "n4";
    f.mu = LieBracket(4);
    f.mu.set(0, 1, 2, a);
    f.mu.set(0, 2, 3, b);
    f.triple = pairs_triple(4, {{1, 4}, {2, 3}});
    f.params = {"a", "b"};
    return f;
}

Fixture fixture_anna(double a, double b) {
    Fixture f;
    f.name = "anna";
    f.mu = LieBracket(4);
    f.mu.set(0, 1, 1, -a);
    f.mu.set(0, 2, 2, 2.0 * a);
    f.mu.set(0, 3, 3, a);
    f.mu.set(1, 2, 3, b);
    f.triple = pairs_triple(4, {{1, 3}, {2, 4}});
    f.params = {"a", "b"};
    return f;
}

Fixture fixture_h3h3(double a, double b) {
    Fixture f;
    f.name = "h3h3";
    f.mu = LieBracket(6);
    f.mu.set(0, 1, 4, a);
    f.mu.set(2, 3, 5, b);
    f.triple = pairs_triple(6, {{1, 5}, {2, 4}, {3, 6}});
    f.params = {"a", "b"};
    return f;
}

Fixture fixture_product() {
    Fixture f;
    f.name = "product";
    f.mu = LieBracket(6);
    f.mu.set(0, 1, 1, 1.0);   // aff(R) factor
    f.mu.set(2, 4, 4, 1.0);   // aff(C) factor: [z1,z2] = z2 over C
    f.mu.set(2, 5, 5, 1.0);
    f.mu.set(3, 4, 5, 1.0);
    f.mu.set(3, 5, 4, -1.0);
    f.triple = pairs_triple(6, {{1, 2}, {3, 4}, {5, 6}});
    return f;
}

const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"abelian", "aff", "n4",
                                                   "anna",    "h3h3", "product"};
    return names;
}

Fixture fixture_by_name(const std::string& name, const std::vector<double>& params) {
    const auto arity_check = [&](std::size_t want) {
        if (!params.empty() && params.size() != want)
            throw validation_error("fixture '" + name + "' takes " + std::to_string(want) +
                                   " parameters, got " + std::to_string(params.size()));
    };
    if (name == "abelian") {
        arity_check(0);
        return fixture_abelian();
    }
    if (name == "aff") {
        arity_check(0);
        return fixture_aff();
    }
    if (name == "n4") {
        arity_check(2);
        return params.empty() ? fixture_n4() : fixture_n4(params[0], params[1]);
    }
    if (name == "anna") {
        arity_check(2);
        return params.empty() ? fixture_anna() : fixture_anna(params[0], params[1]);
    }
    if (name == "h3h3") {
        arity_check(2);
        return params.empty() ? fixture_h3h3() : fixture_h3h3(params[0], params[1]);
    }
    if (name == "product") {
        arity_check(0);
        return fixture_product();
    }
    throw validation_error("unknown fixture '" + name + "'");
}

}  // namespace bflow
