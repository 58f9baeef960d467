#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mttlab/format.hpp"
#include "mttlab/normalize.hpp"

namespace mttlab::cli {

using nlohmann::json;

namespace {

int find_or_throw(const Mtt& m, const std::string& state) {
    auto q = m.find_state(state);
    if (!q) throw Error(ErrorCode::invalid_transducer, "unknown state " + state);
    return *q;
}

json timings(double normalize, double decide) {
    return {{"normalize_ms", normalize * 1000.0}, {"decide_ms", decide * 1000.0}};
}

std::vector<std::string> tree_strings(const std::vector<Tree>& ts) {
    std::vector<std::string> out;
    for (const Tree& t : ts) out.push_back(to_string(t));
    return out;
}

std::pair<int, int> parse_range(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--range", "expected a:b");
    int a = std::stoi(text.substr(0, colon)), b = std::stoi(text.substr(colon + 1));
    if (a > b || a < 0) throw CLI::ValidationError("--range", "empty range " + text);
    return {a, b};
}

std::size_t matching_paren(const std::string& s, std::size_t open) {
    int depth = 0;
    for (std::size_t k = open; k < s.size(); ++k) {
        if (s[k] == '(') ++depth;
        if (s[k] == ')' && --depth == 0) return k;
    }
    throw SyntaxError(1, static_cast<int>(open) + 1, "unbalanced pattern");
}

std::string expand_text(const std::string& s, int n) {
    auto k = s.find("^N(");
    if (k == std::string::npos) return s;
    std::size_t j = k;
    while (j > 0 && s[j - 1] != '(' && s[j - 1] != ',' && s[j - 1] != ' ') --j;
    std::string name = s.substr(j, k - j);
    std::size_t close = matching_paren(s, k + 2);
    std::string body = expand_text(s.substr(k + 3, close - k - 3), n);
    for (int r = 0; r < n; ++r) body = name + "(" + body + ")";
    return s.substr(0, j) + body + expand_text(s.substr(close + 1), n);
}

std::vector<Tree> read_inputs(const std::string& source, const std::string& range) {
    std::vector<Tree> out;
    if (std::filesystem::is_regular_file(source)) {
        std::ifstream in(source);
        std::string line;
        while (std::getline(in, line))
            if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(parse_tree(line));
        return out;
    }
    if (source.find("^N(") == std::string::npos) return {parse_tree(source)};
    if (range.empty()) throw CLI::ValidationError("--range", "a pattern needs --range a:b");
    auto [a, b] = parse_range(range);
    for (int n = a; n <= b; ++n) out.push_back(expand_pattern(source, n));
    return out;
}

}  // namespace

Tree expand_pattern(const std::string& pattern, int n) { return parse_tree(expand_text(pattern, n)); }

json loop_json(const Mtt& m, const GeneratorLoop& loop) {
    json la = {{"p", m.lookahead().state_name(loop.la)}};
    if (loop.kind == LoopKind::ml_nesting) la["p0"] = m.lookahead().state_name(loop.la0);
    return {{"kind", to_string(loop.kind)},
            {"context", to_string(loop.context)},
            {"prefix", to_string(loop.prefix)},
            {"states", {{"q0", m.state_name(loop.q0)}, {"q", m.state_name(loop.q)}}},
            {"la", la},
            {"params", {{"i", loop.i}, {"j", loop.j}}}};
}

json decision_json(const DecisionReport& r, const std::string& property) {
    json j = {{"command", "decide"},
              {"property", property},
              {"verdict", r.verdict},
              {"iterations", r.iterations},
              {"timings", timings(r.normalize_seconds, r.decide_seconds)}};
    if (r.verdict)
        j["bound"] = {{"nesting", r.nesting_bound}, {"rhs_height", r.rhs_height}, {"factor", r.factor}, {"exact", r.bound_exact}};
    if (r.loop) j["loop"] = loop_json(r.normalized, *r.loop);
    return j;
}

json pout_json(const Mtt& m, int q, int l, int p, const PoutResult& r) {
    json j = {{"command", "pout"},
              {"state", m.state_name(q)},
              {"param", l},
              {"la", m.lookahead().state_name(p)},
              {"finite", r.finite},
              {"forms", tree_strings(r.forms)}};
    if (r.witness)
        j["witness"] = {{"prefix", to_string(r.witness->prefix)},
                        {"cycle", to_string(r.witness->cycle)},
                        {"base", to_string(r.witness->base)}};
    return j;
}

json profile_json(const std::string& kind, const Mtt& m, const std::vector<Tree>& inputs) {
    json j = {{"command", "profile"}, {"kind", kind}};
    json samples = json::array();
    if (kind == "lsoi") {
        LsoiProfile p = profile_lsoi(m, inputs);
        for (const LsoiSample& s : p.samples)
            samples.push_back({{"input", to_string(s.input)},
                               {"input_size", s.input_size},
                               {"input_height", s.input.height()},
                               {"value", s.distinct_subtrees}});
        j["fit"] = {{"slope", p.slope},
                    {"intercept", p.intercept},
                    {"residual_ratio", p.residual_ratio},
                    {"max_ratio", p.max_ratio},
                    {"hint", to_string(p.hint)}};
    } else {
        Evaluator ev(m);
        for (const Tree& s : inputs) {
            Tree out = ev.apply(s);
            samples.push_back({{"input", to_string(s)},
                               {"input_size", s.size()},
                               {"input_height", s.height()},
                               {"value", kind == "height" ? std::uint64_t{out.height()} : out.size()}});
        }
    }
    j["samples"] = samples;
    return j;
}

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Macro tree transducers with look-ahead: evaluation, normal forms and growth analyses", "mttlab"};
    app.require_subcommand(1);
    bool as_json = false;
    app.add_flag("--json", as_json, "JSON output")->configurable(false);

    std::string file, file2, tree_text, output_path, state, la_name, kind, inputs, range;
    int param = 1, max_iters = 32, budget = -1;
    bool trace = false, csv = false;

    auto* eval = app.add_subcommand("eval", "evaluate M on a tree");
    eval->add_option("file", file)->required();
    eval->add_option("tree", tree_text)->required();
    eval->add_flag("--json", as_json);

    auto* validate_cmd = app.add_subcommand("validate", "check a transducer file");
    validate_cmd->add_option("file", file)->required();
    validate_cmd->add_flag("--json", as_json);

    auto* normalize = app.add_subcommand("normalize", "depth-proper normal form");
    normalize->add_option("file", file)->required();
    normalize->add_option("-o,--output", output_path);
    normalize->add_option("--max-iters", max_iters)->check(CLI::NonNegativeNumber);
    normalize->add_flag("--trace", trace);
    normalize->add_flag("--json", as_json);

    auto* pout = app.add_subcommand("pout", "parameter-output forms");
    pout->add_option("file", file)->required();
    pout->add_option("--state", state)->required();
    pout->add_option("--param", param)->required();
    pout->add_option("--la", la_name)->required();
    pout->add_option("--budget", budget, "also enumerate inputs up to this size")->check(CLI::NonNegativeNumber);
    pout->add_flag("--json", as_json);

    auto* decide = app.add_subcommand("decide", "decide LSHI or LHI");
    decide->add_option("property", kind)->required()->check(CLI::IsMember({"lshi", "lhi"}));
    decide->add_option("file", file)->required();
    decide->add_option("--max-iters", max_iters)->check(CLI::NonNegativeNumber);
    decide->add_flag("--json", as_json);

    auto* gadget = app.add_subcommand("gadget", "build the distinct-subtree gadget of two transducers");
    gadget->add_option("m1", file)->required();
    gadget->add_option("m2", file2)->required();
    gadget->add_option("-o,--output", output_path);
    gadget->add_flag("--json", as_json);

    auto* profile = app.add_subcommand("profile", "measure output growth");
    profile->add_option("kind", kind)->required()->check(CLI::IsMember({"lsoi", "height", "size"}));
    profile->add_option("file", file)->required();
    profile->add_option("--inputs", inputs, "tree, file of trees, or pattern such as a^N(e)")->required();
    profile->add_option("--range", range, "N range a:b for patterns");
    profile->add_flag("--csv", csv);
    profile->add_flag("--json", as_json);

    auto* equiv = app.add_subcommand("equiv-sample", "search a small input on which two transducers differ");
    equiv->add_option("m1", file)->required();
    equiv->add_option("m2", file2)->required();
    equiv->add_option("--budget", budget)->check(CLI::NonNegativeNumber);
    equiv->add_flag("--json", as_json);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "mttlab: " << e.what() << "\n";
        return usage;
    }

    try {
        if (eval->parsed()) {
            Mtt m = load_mtt(file);
            require_valid(m);
            Tree s = parse_tree(tree_text);
            Tree o = apply(m, s);
            if (as_json)
                out << json{{"command", "eval"},
                            {"input", to_string(s)},
                            {"output", to_string(o)},
                            {"size", o.size()},
                            {"height", o.height()},
                            {"distinct_subtrees", distinct_subtree_count(o)}}
                           .dump(2)
                    << "\n";
            else
                out << o << "\n";
            return ok;
        }
        if (validate_cmd->parsed()) {
            Mtt m = load_mtt(file);
            ValidationReport rep = validate(m);
            if (as_json) {
                json v = json::array();
                for (const Violation& x : rep.violations)
                    v.push_back({{"kind", to_string(x.kind)}, {"key", x.key}, {"message", x.message}});
                out << json{{"command", "validate"}, {"ok", rep.ok()}, {"violations", v}}.dump(2) << "\n";
            } else if (rep.ok()) {
                out << "ok\n";
            } else {
                for (const Violation& x : rep.violations)
                    out << to_string(x.kind) << " at " << x.key << ": " << x.message << "\n";
            }
            return rep.ok() ? ok : invalid_input;
        }
        if (normalize->parsed()) {
            Mtt m = load_mtt(file);
            NormalizeTrace tr;
            NormalizeResult r = depth_proper(m, max_iters, trace ? &tr : nullptr);
            std::string text = print_mtt(r.mtt);
            if (!output_path.empty()) save_mtt(r.mtt, output_path);
            if (as_json) {
                json j = {{"command", "normalize"}, {"iterations", r.iterations}, {"mtt", text}};
                if (trace) j["trace"] = tr.rounds;
                out << j.dump(2) << "\n";
            } else {
                if (trace)
                    for (std::size_t k = 0; k < tr.rounds.size(); ++k)
                        out << "// round " << k << "\n" << tr.rounds[k] << "\n";
                if (output_path.empty()) out << text;
                else out << "iterations " << r.iterations << "\n";
            }
            return ok;
        }
        if (pout->parsed()) {
            Mtt m = load_mtt(file);
            require_valid(m);
            int q = find_or_throw(m, state);
            auto p = m.lookahead().find_state(la_name);
            if (!p) throw Error(ErrorCode::invalid_transducer, "unknown look-ahead state " + la_name);
            PoutResult r = pout_finite(m, q, param, *p);
            std::vector<Tree> enumerated;
            if (budget >= 0)
                enumerated = pout_enumerate(m, q, mask_of({param}), *p, static_cast<std::size_t>(budget));
            if (as_json) {
                json j = pout_json(m, q, param, *p, r);
                if (budget >= 0) j["enumerated"] = {{"budget", budget}, {"forms", tree_strings(enumerated)}};
                out << j.dump(2) << "\n";
            } else {
                out << (r.finite ? "Finite" : "Infinite") << "\n";
                for (const Tree& t : r.forms) out << "  " << t << "\n";
                if (r.witness)
                    out << "witness prefix " << r.witness->prefix << " cycle " << r.witness->cycle << " base "
                        << r.witness->base << "\n";
                if (budget >= 0) {
                    out << "enumerated (size <= " << budget << ")\n";
                    for (const Tree& t : enumerated) out << "  " << t << "\n";
                }
            }
            return ok;
        }
        if (decide->parsed()) {
            Mtt m = load_mtt(file);
            DecisionReport r = kind == "lshi" ? decide_lshi(m, max_iters) : decide_lhi(m, max_iters);
            if (as_json) {
                out << decision_json(r, kind).dump(2) << "\n";
            } else {
                out << (kind == "lshi" ? "LSHI " : "LHI ") << (r.verdict ? "true" : "false") << "\n";
                if (r.verdict)
                    out << "bound height <= " << r.factor << " * " << (kind == "lshi" ? "size" : "height")
                        << " (nesting " << r.nesting_bound << ", rhs height " << r.rhs_height << (r.bound_exact ? "" : ", measured") << ")\n";
                if (r.loop) {
                    const GeneratorLoop& l = *r.loop;
                    out << "loop " << to_string(l.kind) << " C=" << l.context << " C0=" << l.prefix
                        << " q0=" << r.normalized.state_name(l.q0) << " q=" << r.normalized.state_name(l.q)
                        << " i=" << l.i << " j=" << l.j << "\n";
                } else if (!r.verdict) {
                    out << "no loop found within the search caps\n";
                }
                out << "iterations " << r.iterations << "\n";
            }
            return ok;
        }
        if (gadget->parsed()) {
            Mtt m1 = load_mtt(file), m2 = load_mtt(file2);
            GadgetNames names;
            Mtt g = build_gadget(m1, m2, &names);
            if (!output_path.empty()) save_mtt(g, output_path);
            if (as_json) {
                out << json{{"command", "gadget"}, {"mtt", print_mtt(g)}, {"renamed", names.renamed}}.dump(2) << "\n";
            } else if (output_path.empty()) {
                out << print_mtt(g);
            }
            return ok;
        }
        if (profile->parsed()) {
            Mtt m = load_mtt(file);
            std::vector<Tree> trees = read_inputs(inputs, range);
            json j = profile_json(kind, m, trees);
            if (as_json) {
                out << j.dump(2) << "\n";
            } else if (csv) {
                out << "input,input_size,input_height," << (kind == "lsoi" ? "distinct_subtrees" : kind) << "\n";
                for (const json& s : j["samples"])
                    out << '"' << s["input"].get<std::string>() << "\"," << s["input_size"] << ","
                        << s["input_height"] << "," << s["value"] << "\n";
            } else {
                for (const json& s : j["samples"])
                    out << s["input_size"] << " " << s["input_height"] << " " << s["value"] << "\n";
                if (j.contains("fit"))
                    out << "profile slope " << j["fit"]["slope"] << " residual " << j["fit"]["residual_ratio"]
                        << " hint " << j["fit"]["hint"].get<std::string>() << "\n";
            }
            return ok;
        }
        if (equiv->parsed()) {
            Mtt m1 = load_mtt(file), m2 = load_mtt(file2);
            std::size_t b = budget < 0 ? 6 : static_cast<std::size_t>(budget);
            auto c = sampled_equivalence(m1, m2, b);
            if (as_json) {
                json j = {{"command", "equiv-sample"}, {"budget", b}, {"counterexample", nullptr}};
                if (c) j["counterexample"] = {{"input", to_string(*c)},
                                              {"m1", to_string(apply(m1, *c))},
                                              {"m2", to_string(apply(m2, *c))}};
                out << j.dump(2) << "\n";
            } else if (c) {
                out << *c << "\n  m1: " << apply(m1, *c) << "\n  m2: " << apply(m2, *c) << "\n";
            } else {
                out << "none up to size " << b << "\n";
            }
            return ok;
        }
    } catch (const CLI::ParseError& e) {
        err << "mttlab: " << e.what() << "\n";
        return usage;
    } catch (const Error& e) {
        err << "mttlab: " << to_string(e.code()) << ": " << e.what() << "\n";
        return invalid_input;
    } catch (const std::exception& e) {
        err << "mttlab: " << e.what() << "\n";
        return invalid_input;
    }
    return usage;
}

}  // namespace mttlab::cli
