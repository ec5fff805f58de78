#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bflow/driver.hpp"

using namespace bflow;

namespace {

int usage(std::ostream& os) {
    os << "usage: flow <command> [options]\n"
          "\n"
          "commands:\n"
          "  run       integrate one model and emit a series CSV plus a JSON report\n"
          "  sweep     run a family grid concurrently and write an index\n"
          "  fixtures  run the built-in fixture suite, list it, or emit a model file\n"
          "  check     validate a model file and exit\n"
          "\n"
          "run options:\n"
          "  --model FILE | --fixture NAME [--params a=..,b=..]\n"
          "  --flow crf|scf|acrf   --t-end T   [--tol X] [--samples N]\n"
          "  [--blowup-norm B] [--normalized] [--limit] [--out FILE] [--report FILE]\n"
          "\n"
          "sweep options: as run, plus --grid name=v1,v2,... (repeatable),\n"
          "  --out-dir DIR, --jobs N\n"
          "\n"
          "fixtures options: [--all] [--list] [--emit NAME --out FILE [--params ...]]\n"
          "check options: --model FILE\n"
          "\n"
          "FLOW_LOG=error|info|debug controls stderr verbosity.\n";
    return 2;
}

double parse_double(const std::string& s, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw validation_error(what + ": not a number: '" + s + "'");
    return v;
}

int parse_int(const std::string& s, const std::string& what) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw validation_error(what + ": not an integer: '" + s + "'");
    return static_cast<int>(v);
}

std::map<std::string, double> parse_kv(const std::string& s, const std::string& what) {
    std::map<std::string, double> kv;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw validation_error(what + ": expected name=value, got '" + item + "'");
        kv[item.substr(0, eq)] = parse_double(item.substr(eq + 1), what);
    }
    return kv;
}

ModelFile fixture_model(const std::string& name, const std::string& params) {
    const Fixture def = fixture_by_name(name);
    std::vector<double> vals;
    if (!params.empty()) {
        const std::map<std::string, double> kv = parse_kv(params, "--params");
        for (const auto& item : kv)
            if (std::find(def.params.begin(), def.params.end(), item.first) == def.params.end())
                throw validation_error("fixture '" + name + "' has no parameter '" +
                                       item.first + "'");
        for (const std::string& p : def.params) {
            const auto it = kv.find(p);
            if (it == kv.end())
                throw validation_error("--params must set '" + p + "' for fixture '" + name +
                                       "'");
            vals.push_back(it->second);
        }
    }
    return model_from_fixture(fixture_by_name(name, vals));
}

ModelFile resolve_model(const std::string& model_path, const std::string& fixture_name,
                        const std::string& fixture_params) {
    if (model_path.empty() == fixture_name.empty())
        throw validation_error("exactly one of --model or --fixture is required");
    if (!model_path.empty()) return load_model(model_path);
    return fixture_model(fixture_name, fixture_params);
}

struct CommonArgs {
    RunConfig cfg;
    std::string model_path, fixture_name, fixture_params;
    std::map<std::string, std::vector<double>> grid;
    std::string out_dir;
    int jobs = 0;
    bool saw_flow = false, saw_tend = false;
};

bool parse_common(CommonArgs& a, const std::vector<std::string>& args, std::size_t& i) {
    const std::string& arg = args[i];
    const auto need = [&](const char* what) -> const std::string& {
        if (i + 1 >= args.size()) throw validation_error(std::string(what) + " needs a value");
        return args[++i];
    };
    if (arg == "--model") a.model_path = need("--model");
    else if (arg == "--fixture") a.fixture_name = need("--fixture");
    else if (arg == "--params") a.fixture_params = need("--params");
    else if (arg == "--flow") { a.cfg.flow = flow_from_name(need("--flow")); a.saw_flow = true; }
    else if (arg == "--t-end") { a.cfg.t_end = parse_double(need("--t-end"), "--t-end"); a.saw_tend = true; }
    else if (arg == "--tol") a.cfg.tol = parse_double(need("--tol"), "--tol");
    else if (arg == "--samples") a.cfg.samples = parse_int(need("--samples"), "--samples");
    else if (arg == "--blowup-norm") a.cfg.blowup_norm = parse_double(need("--blowup-norm"), "--blowup-norm");
    else if (arg == "--normalized") a.cfg.normalized = true;
    else if (arg == "--limit") a.cfg.emit_limit = true;
    else if (arg == "--out") a.cfg.series_path = need("--out");
    else if (arg == "--report") a.cfg.report_path = need("--report");
    else return false;
    return true;
}

int cmd_run(const std::vector<std::string>& args) {
    CommonArgs a;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (parse_common(a, args, i)) continue;
        throw validation_error("unknown run option '" + args[i] + "'");
    }
    if (!a.saw_flow) throw validation_error("--flow is required");
    if (!a.saw_tend) throw validation_error("--t-end is required");
    const ModelFile model = resolve_model(a.model_path, a.fixture_name, a.fixture_params);
    const RunResult r = run_one(a.cfg, model);
    if (r.exit_code != 0) std::cerr << "integration failure: " << r.message << "\n";
    if (a.cfg.report_path.empty()) std::cout << r.report_json;
    return r.exit_code;
}

int cmd_sweep(const std::vector<std::string>& args) {
    CommonArgs a;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& arg = args[i];
        const auto need = [&](const char* what) -> const std::string& {
            if (i + 1 >= args.size())
                throw validation_error(std::string(what) + " needs a value");
            return args[++i];
        };
        if (arg == "--grid") {
            const std::string spec = need("--grid");
            const auto eq = spec.find('=');
            if (eq == std::string::npos || eq == 0)
                throw validation_error("--grid: expected name=v1,v2,..., got '" + spec + "'");
            std::vector<double> vals;
            std::stringstream ss(spec.substr(eq + 1));
            std::string item;
            while (std::getline(ss, item, ','))
                vals.push_back(parse_double(item, "--grid"));
            a.grid[spec.substr(0, eq)] = vals;
        } else if (arg == "--out-dir") {
            a.out_dir = need("--out-dir");
        } else if (arg == "--jobs") {
            a.jobs = parse_int(need("--jobs"), "--jobs");
        } else if (parse_common(a, args, i)) {
        } else {
            throw validation_error("unknown sweep option '" + args[i] + "'");
        }
    }
    if (!a.saw_flow) throw validation_error("--flow is required");
    if (!a.saw_tend) throw validation_error("--t-end is required");
    const ModelFile model = resolve_model(a.model_path, a.fixture_name, a.fixture_params);
    const SweepResult r = run_sweep(a.cfg, model, a.grid, a.out_dir, a.jobs);
    if (a.out_dir.empty()) std::cout << r.index_json;
    return r.exit_code;
}

int cmd_fixtures(const std::vector<std::string>& args) {
    std::string emit_name, out_path, params;
    bool list_only = false;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& arg = args[i];
        const auto need = [&](const char* what) -> const std::string& {
            if (i + 1 >= args.size())
                throw validation_error(std::string(what) + " needs a value");
            return args[++i];
        };
        if (arg == "--all") continue;  // default behavior
        else if (arg == "--list") list_only = true;
        else if (arg == "--emit") emit_name = need("--emit");
        else if (arg == "--out") out_path = need("--out");
        else if (arg == "--params") params = need("--params");
        else throw validation_error("unknown fixtures option '" + arg + "'");
    }
    if (list_only) {
        for (const std::string& n : fixture_names()) std::cout << n << "\n";
        return 0;
    }
    if (!emit_name.empty()) {
        const ModelFile m = fixture_model(emit_name, params);
        if (out_path.empty()) {
            std::cout << serialize_model(m);
        } else {
            save_model(m, out_path);
            std::cout << "wrote " << out_path << "\n";
        }
        return 0;
    }
    const std::vector<FixtureCheck> checks = fixture_suite();
    std::size_t wf = 7, wn = 5;
    for (const FixtureCheck& c : checks) {
        wf = std::max(wf, c.fixture.size());
        wn = std::max(wn, c.name.size());
    }
    std::cout << std::left << std::setw(static_cast<int>(wf + 2)) << "fixture"
              << std::setw(static_cast<int>(wn + 2)) << "check" << "result\n";
    int failures = 0;
    for (const FixtureCheck& c : checks) {
        std::cout << std::left << std::setw(static_cast<int>(wf + 2)) << c.fixture
                  << std::setw(static_cast<int>(wn + 2)) << c.name
                  << (c.passed ? "pass" : "FAIL");
        if (!c.detail.empty()) std::cout << "  (" << c.detail << ")";
        std::cout << "\n";
        if (!c.passed) ++failures;
    }
    std::cout << checks.size() - failures << "/" << checks.size() << " checks passed\n";
    return failures == 0 ? 0 : 1;
}

int cmd_check(const std::vector<std::string>& args) {
    std::string model_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const std::string& arg = args[i];
        if (arg == "--model") {
            if (i + 1 >= args.size()) throw validation_error("--model needs a value");
            model_path = args[++i];
        } else {
            throw validation_error("unknown check option '" + arg + "'");
        }
    }
    if (model_path.empty()) throw validation_error("--model is required");
    const ModelFile m = load_model(model_path);
    std::cout << "ok: " << model_path << " (dim " << m.dim << ", " << m.bracket.size()
              << " bracket entries)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (argc < 2) return usage(std::cerr);
        const std::string cmd = argv[1];
        const std::vector<std::string> args(argv + 2, argv + argc);
        if (cmd == "run") return cmd_run(args);
        if (cmd == "sweep") return cmd_sweep(args);
        if (cmd == "fixtures") return cmd_fixtures(args);
        if (cmd == "check") return cmd_check(args);
        if (cmd == "--help" || cmd == "-h" || cmd == "help") return usage(std::cout), 0;
        std::cerr << "error: unknown command '" << cmd << "'\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
