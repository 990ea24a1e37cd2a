#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fmc/eval.hpp"
#include "fmc/harness.hpp"
#include "fmc/machine.hpp"
#include "fmc/rewrite.hpp"
#include "fmc/surface.hpp"
#include "fmc/syntax.hpp"
#include "fmc/types.hpp"
#include "json.hpp"

using namespace fmc;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kRuntime = 1, kType = 2, kFuel = 3, kParse = 4 };

struct Options {
    std::string source;
    std::string file;
    std::size_t fuel = 0;
    std::uint64_t seed = 1;
    std::string format = "text";
    unsigned modulus = 8;
    std::string unroll = "forbid";
    std::vector<std::string> preload;
    bool trace = false;
    std::string type;
    bool function_first = false;
    bool surface = false;
    bool zero_input = false;
    // step
    std::size_t count = 1;
    // gen
    std::string what = "term";
    std::size_t size = 30;
    std::size_t locations = 3;
    std::size_t choices = 4;
    double loop_prob = 0.0;
    bool typed = false;
    std::string suite;
    std::size_t n = 100;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool json_out(const Options& o) { return o.format == "json"; }

std::string read_source(const Options& o) {
    if (!o.file.empty()) {
        std::ifstream in(o.file);
        if (!in) throw UsageError("cannot read " + o.file);
        return std::string(std::istreambuf_iterator<char>(in), {});
    }
    if (o.source == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
    return o.source;
}

SurfaceOptions surface_options(const Options& o) {
    SurfaceOptions s;
    s.ints.modulus = o.modulus;
    s.function_first = o.function_first;
    return s;
}

Term load_term(const Options& o, const TypeNames& names) {
    std::string src = read_source(o);
    return o.surface ? desugar_source(src, surface_options(o)) : parse(src, names);
}

// Splits on commas outside brackets.
std::vector<std::string> split_items(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(' || c == '[' || c == '{' || c == '<') ++depth;
        if (c == ')' || c == ']' || c == '}' || (c == '>' && depth > 0)) --depth;
        if (c == ',' && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// loc=t1,t2 lists a stack bottom first; the last term is the head.
Memory preload_memory(const Options& o, const TypeNames& names) {
    Memory m;
    for (const auto& p : o.preload) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw UsageError("--preload expects loc=t1,t2: " + p);
        std::string name = p.substr(0, eq);
        Location loc = (name.empty() || name == "λ") ? Location() : Location(name);
        for (const auto& item : split_items(p.substr(eq + 1))) m.push(loc, parse(item, names));
    }
    return m;
}

Memory initial_memory(const Options& o, const Term& t, const TypeNames& names) {
    Memory m = preload_memory(o, names);
    if (!o.zero_input) return m;
    Memory z = zero_memory(synthesize({}, t).in);
    // Preloaded stacks replace the zero ones location by location.
    for (auto& [loc, st] : m.stacks) z.stacks[loc] = st;
    return z;
}

UnrollPolicy unroll_policy(const Options& o) {
    if (o.unroll == "forbid") return UnrollPolicy::Forbid();
    try {
        std::size_t used = 0;
        unsigned long k = std::stoul(o.unroll, &used);
        if (used == o.unroll.size()) return UnrollPolicy::Bounded(k);
    } catch (const std::exception&) {
    }
    throw UsageError("--unroll expects 'forbid' or a number: " + o.unroll);
}

json memory_json(const Memory& m) {
    json j = json::object();
    for (const auto& [loc, st] : m.stacks) {
        auto items = json::array();
        for (const auto& t : st) items.push_back(print(t));
        j[display(loc)] = items;
    }
    return j;
}

json term_tree(const Term& t) {
    json j;
    switch (t->kind) {
        case Kind::Var: j = {{"kind", "var"}, {"name", t->name}}; break;
        case Kind::Choice: j = {{"kind", "choice"}, {"label", to_string(t->label)}}; break;
        case Kind::Push:
            j = {{"kind", "push"}, {"loc", display(t->loc)}, {"arg", term_tree(t->a)}, {"cont", term_tree(t->b)}};
            break;
        case Kind::Pop:
            j = {{"kind", "pop"}, {"loc", display(t->loc)}, {"binder", t->name}, {"cont", term_tree(t->b)}};
            if (t->annot) j["annot"] = print_type(*t->annot);
            break;
        case Kind::Case:
            j = {{"kind", "case"},
                 {"label", to_string(t->label)},
                 {"body", term_tree(t->a)},
                 {"handler", term_tree(t->b)}};
            break;
        case Kind::Loop: j = {{"kind", "loop"}, {"label", to_string(t->label)}, {"body", term_tree(t->a)}}; break;
    }
    return j;
}

void tree_text(const Term& t, int indent, std::ostream& os) {
    os << std::string(2 * indent, ' ');
    switch (t->kind) {
        case Kind::Var: os << "var " << t->name << '\n'; return;
        case Kind::Choice: os << "choice " << to_string(t->label) << '\n'; return;
        case Kind::Push:
            os << "push " << display(t->loc) << '\n';
            tree_text(t->a, indent + 1, os);
            tree_text(t->b, indent + 1, os);
            return;
        case Kind::Pop:
            os << "pop " << display(t->loc) << ' ' << t->name;
            if (t->annot) os << " : " << print_type(*t->annot);
            os << '\n';
            tree_text(t->b, indent + 1, os);
            return;
        case Kind::Case:
            os << "case " << to_string(t->label) << '\n';
            tree_text(t->a, indent + 1, os);
            tree_text(t->b, indent + 1, os);
            return;
        case Kind::Loop:
            os << "loop " << to_string(t->label) << '\n';
            tree_text(t->a, indent + 1, os);
            return;
    }
}

int cmd_parse(const Options& o, const TypeNames& names) {
    Term t = load_term(o, names);
    if (json_out(o))
        std::cout << json{{"term", print(t)}, {"size", size(t)}, {"tree", term_tree(t)}}.dump() << '\n';
    else
        tree_text(t, 0, std::cout);
    return kOk;
}

int cmd_print(const Options& o, const TypeNames& names) {
    Term t = load_term(o, names);
    if (json_out(o))
        std::cout << json{{"term", print(t, &names)}}.dump() << '\n';
    else
        std::cout << print(t, &names) << '\n';
    return kOk;
}

int report_run(const Options& o, const RunResult& r, const Trace* tr) {
    json j{{"steps", r.steps}, {"pops", r.pops}, {"memory", memory_json(r.state.mem)}};
    int code = kOk;
    switch (r.kind) {
        case RunResult::Final:
            j["status"] = "final";
            j["choice"] = to_string(r.choice);
            break;
        case RunResult::Stuck:
            j["status"] = "stuck";
            j["reason"] = reason_name(r.reason);
            j["term"] = print(r.state.term);
            code = kRuntime;
            break;
        case RunResult::FuelExhausted:
            j["status"] = "fuel-exhausted";
            code = kFuel;
            break;
    }
    if (tr) j["trace"] = json::parse(trace_json(*tr));
    if (json_out(o)) {
        std::cout << j.dump() << '\n';
    } else {
        if (tr) std::cout << trace_text(*tr);
        if (r.kind == RunResult::Final)
            std::cout << "memory: " << print_memory(r.state.mem) << "  choice: " << to_string(r.choice)
                      << "  steps: " << r.steps << '\n';
    }
    if (r.kind == RunResult::Stuck)
        std::cerr << "stuck (" << reason_name(r.reason) << ") after " << r.steps << " steps at "
                  << print(r.state.term) << '\n';
    if (r.kind == RunResult::FuelExhausted) std::cerr << "fuel exhausted after " << r.steps << " steps\n";
    return code;
}

int cmd_run(const Options& o, const TypeNames& names) {
    Term t = load_term(o, names);
    Memory m = initial_memory(o, t, names);
    Trace tr;
    RunResult r = run(t, m, o.fuel, o.trace ? &tr : nullptr);
    return report_run(o, r, o.trace ? &tr : nullptr);
}

int cmd_eval(const Options& o, const TypeNames& names) {
    Term t = load_term(o, names);
    Memory m = initial_memory(o, t, names);
    EvalResult r = eval_big(t, m, o.fuel);
    json j{{"steps", r.steps}, {"memory", memory_json(r.mem)}};
    int code = kOk;
    switch (r.kind) {
        case EvalResult::Value:
            j["status"] = "final";
            j["choice"] = to_string(r.choice);
            break;
        case EvalResult::Failed:
            j["status"] = "stuck";
            j["reason"] = reason_name(r.reason);
            code = kRuntime;
            break;
        case EvalResult::Diverged:
            j["status"] = "fuel-exhausted";
            code = kFuel;
            break;
    }
    if (json_out(o))
        std::cout << j.dump() << '\n';
    else if (r.kind == EvalResult::Value)
        std::cout << "memory: " << print_memory(r.mem) << "  choice: " << to_string(r.choice) << "  steps: " << r.steps
                  << '\n';
    if (r.kind == EvalResult::Failed) std::cerr << "stuck (" << reason_name(r.reason) << ")\n";
    if (r.kind == EvalResult::Diverged) std::cerr << "fuel exhausted after " << r.steps << " steps\n";
    return code;
}

json state_json(const State& s) {
    auto cont = json::array();
    for (auto it = s.cont.rbegin(); it != s.cont.rend(); ++it)
        cont.push_back({{"label", to_string(it->label)}, {"term", print(it->term)}});
    return {{"memory", memory_json(s.mem)}, {"term", print(s.term)}, {"cont", cont}};
}

std::string state_text(const State& s) {
    std::string c;
    for (auto it = s.cont.rbegin(); it != s.cont.rend(); ++it) {
        if (!c.empty()) c += ", ";
        c += to_string(it->label) + "->" + print(it->term);
    }
    return "memory: " + print_memory(s.mem) + "  term: " + print(s.term) + "  cont: " + (c.empty() ? "ε" : c);
}

int cmd_step(const Options& o, const TypeNames& names) {
    Term t = load_term(o, names);
    State s{initial_memory(o, t, names), t, {}};
    auto steps = json::array();
    for (std::size_t k = 0; k < o.count; ++k) {
        StepResult r = step(s);
        if (r.kind == StepResult::Final) {
            if (json_out(o))
                steps.push_back({{"status", "final"}});
            else
                std::cout << "final\n";
            break;
        }
        if (r.kind == StepResult::Stuck) {
            if (json_out(o)) std::cout << json{{"steps", steps}, {"status", "stuck"}, {"reason", reason_name(r.reason)}}.dump() << '\n';
            std::cerr << "stuck (" << reason_name(r.reason) << ") at " << print(s.term) << '\n';
            return kRuntime;
        }
        if (json_out(o)) {
            json j = state_json(s);
            j["rule"] = rule_name(r.rule);
            steps.push_back(j);
        } else {
            std::cout << rule_name(r.rule) << "  " << state_text(s) << '\n';
        }
    }
    if (json_out(o)) std::cout << json{{"steps", steps}}.dump() << '\n';
    return kOk;
}

int cmd_normalize(const Options& o, const TypeNames& names) {
    Term t = load_term(o, names);
    UnrollPolicy pol = unroll_policy(o);
    ReductionTrace tr;
    NormalizeResult r = normalize(t, o.fuel, pol, o.trace ? &tr : nullptr);
    if (json_out(o)) {
        json j{{"term", print(r.term)}, {"steps", r.steps}, {"exhausted", r.exhausted}};
        if (o.trace) j["trace"] = json::parse(reduction_json(tr));
        std::cout << j.dump() << '\n';
    } else {
        if (o.trace) std::cout << reduction_text(tr);
        std::cout << print(r.term) << "  steps: " << r.steps << '\n';
    }
    if (r.exhausted) {
        std::cerr << "fuel exhausted after " << r.steps << " steps\n";
        return kFuel;
    }
    return kOk;
}

int cmd_synth(const Options& o, const TypeNames& names) {
    Term t = load_term(o, names);
    ValueType ty = synthesize({}, t);
    if (json_out(o))
        std::cout << json{{"type", print_type(ty, &names)}}.dump() << '\n';
    else
        std::cout << print_type(ty, &names) << '\n';
    return kOk;
}

int cmd_check(const Options& o, const TypeNames& names) {
    if (o.type.empty()) throw UsageError("check needs --type");
    ValueType goal = parse_type(o.type, names);
    Term t = load_term(o, names);
    check({}, t, goal);
    if (json_out(o))
        std::cout << json{{"type", print_type(goal, &names)}, {"ok", true}}.dump() << '\n';
    else
        std::cout << "ok\n";
    return kOk;
}

int cmd_desugar(const Options& o, const TypeNames& names) {
    Term t = desugar_source(read_source(o), surface_options(o));
    if (json_out(o))
        std::cout << json{{"term", print(t, &names)}}.dump() << '\n';
    else
        std::cout << print(t, &names) << '\n';
    return kOk;
}

int cmd_inhabit(const Options& o, const TypeNames& names) {
    ValueType ty = parse_type(read_source(o), names);
    Term z = inhabit(ty);
    if (json_out(o))
        std::cout << json{{"type", print_type(ty, &names)}, {"term", print(z, &names)}}.dump() << '\n';
    else
        std::cout << print(z, &names) << '\n';
    return kOk;
}

int cmd_gen(const Options& o) {
    if (!o.suite.empty()) {
        std::vector<std::string> names = o.suite == "all" ? suite_names() : std::vector<std::string>{o.suite};
        std::vector<SuiteReport> reps;
        for (const auto& s : names) {
            GenConfig cfg = suite_config(s, o.seed);
            reps.push_back(run_suite(s, o.n, cfg));
            if (!json_out(o)) std::cout << report_text(reps.back()) << '\n';
        }
        if (json_out(o)) std::cout << report_json(reps) << '\n';
        for (const auto& r : reps)
            if (!r.ok()) return kRuntime;
        return kOk;
    }
    GenConfig cfg;
    cfg.seed = o.seed;
    cfg.max_size = o.size;
    cfg.locations = o.locations;
    cfg.choices = o.choices;
    cfg.loop_prob = o.loop_prob;
    cfg.typed = o.typed;
    validate(cfg);
    auto items = json::array();
    for (std::size_t k = 0; k < o.count; ++k) {
        Rng rng = item_rng(cfg.seed, k);
        std::string s = o.what == "type" ? print_type(gen_type(cfg, rng, cfg.type_depth)) : print(gen_term(cfg, rng));
        if (json_out(o))
            items.push_back(s);
        else
            std::cout << s << '\n';
    }
    if (json_out(o)) std::cout << json{{o.what == "type" ? "types" : "terms", items}}.dump() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Functional machine calculus toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    o.fuel = default_fuel();

    app.add_option("--fuel", o.fuel, "Step budget (default 10000, or FMC_FUEL)");
    app.add_option("--seed", o.seed, "Random seed");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--modulus", o.modulus, "Integer modulus for Z")->check(CLI::Range(1u, 4096u));
    app.add_option("--unroll", o.unroll, "Unroll policy for normalize: forbid or a bound per loop");
    app.add_option("--preload", o.preload, "Initial stack, loc=t1,t2 listed bottom first (repeatable)")
        ->allow_extra_args(false);
    app.add_flag("--trace", o.trace, "Print the machine or reduction trace");
    app.add_option("--type", o.type, "Goal type for check");
    app.add_flag("--function-first", o.function_first, "Surface application evaluates the function first");
    app.add_flag("--surface", o.surface, "Input is a surface program, desugared first");
    app.add_flag("--zero-input", o.zero_input, "Start from the zero memory of the synthesized input type");
    app.add_option("-f,--file", o.file, "Read the input from a file");

    auto input = [&](CLI::App* sub) { sub->add_option("source", o.source, "Inline source, or - for stdin"); };
    struct Cmd {
        const char* name;
        const char* help;
    };
    const std::vector<Cmd> cmds = {
        {"parse", "Parse and show the syntax tree"},
        {"print", "Parse and pretty-print"},
        {"run", "Run the abstract machine"},
        {"eval", "Big-step evaluation"},
        {"step", "Single machine steps"},
        {"normalize", "Leftmost-outermost normalization"},
        {"check", "Check against --type"},
        {"synth", "Synthesize a type"},
        {"desugar", "Translate a surface program to a core term"},
        {"inhabit", "Zero term of a type"},
        {"gen", "Generate random terms or types, or run property suites"},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& c : cmds) {
        auto* s = app.add_subcommand(c.name, c.help);
        if (std::string(c.name) != "gen") input(s);
        subs[c.name] = s;
    }
    subs["step"]->add_option("--count", o.count, "Number of steps")->check(CLI::PositiveNumber);
    auto* gen = subs["gen"];
    gen->add_option("--what", o.what, "term or type")->check(CLI::IsMember({"term", "type"}));
    gen->add_option("--count", o.count, "Number of items");
    gen->add_option("--size", o.size, "Maximum term size")->check(CLI::PositiveNumber);
    gen->add_option("--locations", o.locations, "Location alphabet size")->check(CLI::PositiveNumber);
    gen->add_option("--choices", o.choices, "Choice alphabet size")->check(CLI::PositiveNumber);
    gen->add_option("--loop-prob", o.loop_prob, "Loop probability")->check(CLI::Range(0.0, 1.0));
    gen->add_flag("--typed", o.typed, "Generate typed terms");
    gen->add_option("--suite", o.suite, "Run a property suite (or all)");
    gen->add_option("--n", o.n, "Cases per suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kParse;
    }

    std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd != "gen" && o.source.empty() && o.file.empty()) {
        std::cerr << "error: " << cmd << " needs a source argument or --file\n";
        return kParse;
    }
    if (!o.suite.empty() && o.suite != "all") {
        auto ns = suite_names();
        if (std::find(ns.begin(), ns.end(), o.suite) == ns.end()) {
            std::cerr << "error: unknown suite " << o.suite << '\n';
            return kParse;
        }
    }
    TypeNames names = standard_names(o.modulus);
    try {
        unroll_policy(o);
        if (cmd == "parse") return cmd_parse(o, names);
        if (cmd == "print") return cmd_print(o, names);
        if (cmd == "run") return cmd_run(o, names);
        if (cmd == "eval") return cmd_eval(o, names);
        if (cmd == "step") return cmd_step(o, names);
        if (cmd == "normalize") return cmd_normalize(o, names);
        if (cmd == "check") return cmd_check(o, names);
        if (cmd == "synth") return cmd_synth(o, names);
        if (cmd == "desugar") return cmd_desugar(o, names);
        if (cmd == "inhabit") return cmd_inhabit(o, names);
        return cmd_gen(o);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kParse;
    } catch (const DesugarError& e) {
        std::cerr << "desugar error: " << e.what() << '\n';
        return kParse;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParse;
    } catch (const TypeError& e) {
        std::cerr << "type error: " << e.what() << '\n';
        return kType;
    } catch (const TermTooLarge& e) {
        std::cerr << e.what() << '\n';
        return kFuel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
