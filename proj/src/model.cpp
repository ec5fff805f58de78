#include "bflow/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "bflow/bracket.hpp"

namespace bflow {

using nlohmann::json;

namespace {

int line_of_offset(const std::string& text, std::size_t off) {
    off = std::min(off, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + off, '\n'));
}

int key_line(const std::string& text, const std::string& key) {
    const std::size_t pos = text.find("\"" + key + "\"");
    return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

// Lines of the elements of the array stored under `key`, for error messages.
std::vector<int> array_entry_lines(const std::string& text, const std::string& key) {
    std::vector<int> lines;
    std::size_t pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return lines;
    pos = text.find('[', pos);
    if (pos == std::string::npos) return lines;
    int depth = 0;
    bool in_str = false;
    for (std::size_t q = pos; q < text.size(); ++q) {
        const char ch = text[q];
        if (in_str) {
            if (ch == '\\') ++q;
            else if (ch == '"') in_str = false;
            continue;
        }
        if (ch == '"') {
            in_str = true;
        } else if (ch == '[' || ch == '{') {
            if (depth == 1) lines.push_back(line_of_offset(text, q));
            ++depth;
        } else if (ch == ']' || ch == '}') {
            if (--depth == 0) break;
        }
    }
    return lines;
}

[[noreturn]] void fail(const std::string& filename, int line, const std::string& msg) {
    throw validation_error(filename + ":" + std::to_string(line) + ": " + msg);
}

Matrix parse_matrix(const json& rows, int dim, const std::string& filename, int line,
                    const std::string& what) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != dim)
        fail(filename, line, what + " must be a " + std::to_string(dim) + "x" +
                                 std::to_string(dim) + " matrix");
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        const json& row = rows[r];
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            fail(filename, line, what + " row " + std::to_string(r + 1) + " must have " +
                                     std::to_string(dim) + " numbers");
        for (int c = 0; c < dim; ++c) {
            if (!row[c].is_number())
                fail(filename, line, what + " entries must be numbers");
            m(r, c) = row[c].get<double>();
            if (!std::isfinite(m(r, c))) fail(filename, line, what + " entries must be finite");
        }
    }
    return m;
}

std::vector<std::pair<int, int>> canonical_pairs(int dim) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 1; i + 1 <= dim; i += 2) pairs.emplace_back(i, i + 1);
    return pairs;
}

Matrix pairs_matrix(int dim, const std::vector<std::pair<int, int>>& pairs) {
    Matrix w = Matrix::Zero(dim, dim);
    for (const auto& p : pairs) {
        w(p.first - 1, p.second - 1) = 1.0;
        w(p.second - 1, p.first - 1) = -1.0;
    }
    return w;
}

}  // namespace

ModelFile parse_model(const std::string& text, const std::string& filename) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(filename, line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0),
             "not valid JSON here");
    }
    if (!j.is_object()) fail(filename, 1, "top level must be an object");

    static const std::set<std::string> allowed = {"dim", "bracket", "omega", "metric", "family"};
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            fail(filename, key_line(text, item.key()), "unknown key '" + item.key() + "'");

    ModelFile m;

    if (!j.contains("dim") || !j["dim"].is_number_integer())
        fail(filename, key_line(text, "dim"), "'dim' must be an integer");
    m.dim = j["dim"].get<int>();
    if (m.dim < 1 || m.dim > 64)
        fail(filename, key_line(text, "dim"), "'dim' must be in [1, 64]");

    if (j.contains("family")) {
        if (!j["family"].is_object())
            fail(filename, key_line(text, "family"), "'family' must be an object");
        for (const auto& item : j["family"].items()) {
            if (!item.value().is_number() || !std::isfinite(item.value().get<double>()))
                fail(filename, key_line(text, item.key()),
                     "family parameter '" + item.key() + "' must be a finite number");
            m.family[item.key()] = item.value().get<double>();
        }
    }

    if (!j.contains("bracket") || !j["bracket"].is_array())
        fail(filename, key_line(text, "bracket"), "'bracket' must be an array");
    const std::vector<int> entry_lines = array_entry_lines(text, "bracket");
    std::set<std::tuple<int, int, int>> seen;
    int idx = 0;
    for (const json& e : j["bracket"]) {
        const int ln = idx < static_cast<int>(entry_lines.size()) ? entry_lines[idx]
                                                                  : key_line(text, "bracket");
        const std::string where = "bracket entry " + std::to_string(idx + 1);
        ++idx;
        if (!e.is_object()) fail(filename, ln, where + " must be an object");
        static const std::set<std::string> efields = {"i", "j", "k", "c", "param"};
        for (const auto& item : e.items())
            if (!efields.count(item.key()))
                fail(filename, ln, where + ": unknown field '" + item.key() + "'");
        for (const char* req : {"i", "j", "k"})
            if (!e.contains(req) || !e[req].is_number_integer())
                fail(filename, ln, where + ": '" + req + "' must be an integer");
        BracketEntry be;
        be.i = e["i"].get<int>();
        be.j = e["j"].get<int>();
        be.k = e["k"].get<int>();
        if (e.contains("c")) {
            if (!e["c"].is_number()) fail(filename, ln, where + ": 'c' must be a number");
            be.c = e["c"].get<double>();
            if (!std::isfinite(be.c)) fail(filename, ln, where + ": 'c' must be finite");
        }
        if (e.contains("param")) {
            if (!e["param"].is_string() || e["param"].get<std::string>().empty())
                fail(filename, ln, where + ": 'param' must be a nonempty string");
            be.param = e["param"].get<std::string>();
            if (!m.family.count(be.param))
                fail(filename, ln,
                     where + ": references undeclared family parameter '" + be.param + "'");
        }
        if (be.i < 1 || be.j < 1 || be.k < 1 || be.i > m.dim || be.j > m.dim || be.k > m.dim)
            fail(filename, ln, where + ": index out of range 1.." + std::to_string(m.dim));
        if (be.i >= be.j) fail(filename, ln, where + ": requires i < j");
        if (!seen.insert({be.i, be.j, be.k}).second)
            fail(filename, ln, where + ": duplicate (i, j, k)");
        m.bracket.push_back(be);
    }

    if (!j.contains("omega")) fail(filename, 1, "'omega' is required");
    const json& om = j["omega"];
    const int oline = key_line(text, "omega");
    if (om.is_string()) {
        if (om.get<std::string>() != "canonical")
            fail(filename, oline, "unknown omega preset '" + om.get<std::string>() + "'");
        if (m.dim % 2 != 0) fail(filename, oline, "canonical omega needs even dimension");
        m.omega_preset = "canonical";
    } else if (om.is_object()) {
        if (om.size() != 1 || !om.contains("pairs") || !om["pairs"].is_array())
            fail(filename, oline, "omega object must be {\"pairs\": [[i,j],...]}");
        std::vector<bool> used(m.dim, false);
        for (const json& p : om["pairs"]) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
                !p[1].is_number_integer())
                fail(filename, oline, "omega pairs must be integer 2-arrays");
            const int a = p[0].get<int>(), b = p[1].get<int>();
            if (a < 1 || b < 1 || a > m.dim || b > m.dim || a == b)
                fail(filename, oline, "omega pair indices out of range or equal");
            if (used[a - 1] || used[b - 1])
                fail(filename, oline, "omega pairs must use each index at most once");
            used[a - 1] = used[b - 1] = true;
            m.omega_pairs.emplace_back(a, b);
        }
        if (std::find(used.begin(), used.end(), false) != used.end())
            fail(filename, oline, "omega pairs must cover every index");
    } else if (om.is_array()) {
        m.omega_matrix = parse_matrix(om, m.dim, filename, oline, "omega");
        const double scale = 1.0 + m.omega_matrix.cwiseAbs().maxCoeff();
        if ((m.omega_matrix + m.omega_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
            fail(filename, oline, "omega matrix must be antisymmetric");
    } else {
        fail(filename, oline, "omega must be a preset name, a pairs object, or a matrix");
    }

    if (j.contains("metric")) {
        const json& me = j["metric"];
        const int mline = key_line(text, "metric");
        if (me.is_string()) {
            if (me.get<std::string>() != "identity")
                fail(filename, mline, "unknown metric preset '" + me.get<std::string>() + "'");
        } else if (me.is_array()) {
            m.metric_matrix = parse_matrix(me, m.dim, filename, mline, "metric");
            const double scale = 1.0 + m.metric_matrix.cwiseAbs().maxCoeff();
            if ((m.metric_matrix - m.metric_matrix.transpose()).cwiseAbs().maxCoeff() >
                1e-12 * scale)
                fail(filename, mline, "metric must be symmetric");
            Eigen::LLT<Matrix> llt(m.metric_matrix);
            if (llt.info() != Eigen::Success)
                fail(filename, mline, "metric must be positive definite");
            m.metric_identity = false;
        } else {
            fail(filename, mline, "metric must be \"identity\" or a matrix");
        }
    }

    try {
        model_bracket(m);
    } catch (const validation_error& e) {
        fail(filename, key_line(text, "bracket"), e.what());
    }
    try {
        model_triple(m);
    } catch (const validation_error& e) {
        fail(filename, key_line(text, "omega"), e.what());
    }
    return m;
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str(), path);
}

std::string serialize_model(const ModelFile& m) {
    json j;
    j["dim"] = m.dim;
    j["bracket"] = json::array();
    for (const BracketEntry& e : m.bracket) {
        json je = {{"i", e.i}, {"j", e.j}, {"k", e.k}, {"c", e.c}};
        if (!e.param.empty()) je["param"] = e.param;
        j["bracket"].push_back(je);
    }
    if (!m.omega_preset.empty()) {
        j["omega"] = m.omega_preset;
    } else if (!m.omega_pairs.empty()) {
        json pairs = json::array();
        for (const auto& p : m.omega_pairs) pairs.push_back({p.first, p.second});
        j["omega"] = {{"pairs", pairs}};
    } else {
        json rows = json::array();
        for (int r = 0; r < m.dim; ++r) {
            json row = json::array();
            for (int c = 0; c < m.dim; ++c) row.push_back(m.omega_matrix(r, c));
            rows.push_back(row);
        }
        j["omega"] = rows;
    }
    if (m.metric_identity) {
        j["metric"] = "identity";
    } else {
        json rows = json::array();
        for (int r = 0; r < m.dim; ++r) {
            json row = json::array();
            for (int c = 0; c < m.dim; ++c) row.push_back(m.metric_matrix(r, c));
            rows.push_back(row);
        }
        j["metric"] = rows;
    }
    if (!m.family.empty()) j["family"] = m.family;
    return j.dump(2) + "\n";
}

void save_model(const ModelFile& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("cannot write model file '" + path + "'");
    out << serialize_model(m);
}

LieBracket model_bracket(const ModelFile& m,
                         const std::map<std::string, double>& family_override) {
    std::map<std::string, double> fam = m.family;
    for (const auto& kv : family_override) {
        if (!fam.count(kv.first))
            throw validation_error("model declares no family parameter '" + kv.first + "'");
        fam[kv.first] = kv.second;
    }
    LieBracket b(m.dim);
    for (const BracketEntry& e : m.bracket) {
        const double scale = e.param.empty() ? 1.0 : fam.at(e.param);
        b.set(e.i - 1, e.j - 1, e.k - 1, e.c * scale);
    }
    require_jacobi(b);
    return b;
}

Matrix model_omega(const ModelFile& m) {
    if (m.omega_preset == "canonical") return pairs_matrix(m.dim, canonical_pairs(m.dim));
    if (!m.omega_pairs.empty()) return pairs_matrix(m.dim, m.omega_pairs);
    return m.omega_matrix;
}

HermitianTriple model_triple(const ModelFile& m) {
    const Matrix g =
        m.metric_identity ? Matrix(Matrix::Identity(m.dim, m.dim)) : m.metric_matrix;
    return triple_from_pair(model_omega(m), g);
}

ModelFile model_from_fixture(const Fixture& f) {
    ModelFile m;
    const int d = f.mu.dim();
    m.dim = d;

    // Prefer the pairs encoding when the form is exactly a pairing and the
    // metric is the identity; all built-in fixtures satisfy this.
    std::vector<std::pair<int, int>> pairs;
    std::vector<bool> used(d, false);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            if (f.triple.omega(i, j) == 1.0 && !used[i] && !used[j]) {
                pairs.emplace_back(i + 1, j + 1);
                used[i] = used[j] = true;
            }
    const bool identity_metric = f.triple.metric.isIdentity(0.0);
    if (identity_metric &&
        (pairs_matrix(d, pairs) - f.triple.omega).cwiseAbs().maxCoeff() == 0.0) {
        m.omega_pairs = pairs;
    } else {
        m.omega_matrix = f.triple.omega;
    }
    if (!identity_metric) {
        m.metric_identity = false;
        m.metric_matrix = f.triple.metric;
    }

    // Family tagging: express each structure constant as c * parameter.
    const auto tag = [&](int i, int j, int k, double c, const std::string& p) {
        BracketEntry e;
        e.i = i;
        e.j = j;
        e.k = k;
        e.c = c;
        e.param = p;
        m.bracket.push_back(e);
    };
    if (f.name == "n4") {
        m.family = {{"a", f.mu.coeff(0, 1, 2)}, {"b", f.mu.coeff(0, 2, 3)}};
        tag(1, 2, 3, 1.0, "a");
        tag(1, 3, 4, 1.0, "b");
    } else if (f.name == "anna") {
        m.family = {{"a", f.mu.coeff(0, 3, 3)}, {"b", f.mu.coeff(1, 2, 3)}};
        tag(1, 2, 2, -1.0, "a");
        tag(1, 3, 3, 2.0, "a");
        tag(1, 4, 4, 1.0, "a");
        tag(2, 3, 4, 1.0, "b");
    } else if (f.name == "h3h3") {
        m.family = {{"a", f.mu.coeff(0, 1, 4)}, {"b", f.mu.coeff(2, 3, 5)}};
        tag(1, 2, 5, 1.0, "a");
        tag(3, 4, 6, 1.0, "b");
    } else {
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    if (f.mu.coeff(i, j, k) != 0.0)
                        tag(i + 1, j + 1, k + 1, f.mu.coeff(i, j, k), "");
    }
    return m;
}

}  // namespace bflow
