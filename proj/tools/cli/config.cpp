#include "cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace genopt::cli {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
    throw ConfigError("E_CONFIG_INVALID", where + ": " + what);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) invalid(where, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) {
            throw ConfigError("E_CONFIG_UNKNOWN_KEY", where + ": unknown key '" + key + "'");
        }
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const char* key, double fallback, const std::string& where) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number()) invalid(where + "." + key, "expected a number");
    return v->get<double>();
}

std::uint64_t get_unsigned(const json& obj, const char* key, std::uint64_t fallback, const std::string& where) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
        invalid(where + "." + key, "expected a non-negative integer");
    }
    return v->get<std::uint64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback, const std::string& where) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_boolean()) invalid(where + "." + key, "expected true or false");
    return v->get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
    const json* v = find(obj, key);
    if (!v) invalid(where, std::string("missing required key '") + key + "'");
    if (!v->is_string()) invalid(where + "." + key, "expected a string");
    return v->get<std::string>();
}

std::vector<double> get_vector(const json& obj, const char* key, const std::string& where) {
    const json* v = find(obj, key);
    if (!v) invalid(where, std::string("missing required key '") + key + "'");
    if (!v->is_array()) invalid(where + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
        if (!e.is_number()) invalid(where + "." + key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

ProblemSpec problem_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) invalid(where, "expected an object");
    ProblemSpec p;
    const std::string kind = get_string(j, "kind", where);
    if (kind == "rosenbrock" || kind == "beale") {
        check_keys(j, {"kind"}, where);
        p.kind = kind == "rosenbrock" ? ProblemKind::rosenbrock : ProblemKind::beale;
    } else if (kind == "quadratic") {
        check_keys(j, {"kind", "matrix", "offset"}, where);
        p.kind = ProblemKind::quadratic;
        p.offset = get_vector(j, "offset", where);
        const json* m = find(j, "matrix");
        if (!m || !m->is_array()) invalid(where + ".matrix", "expected an array of rows");
        for (const auto& row : *m) {
            if (!row.is_array()) invalid(where + ".matrix", "expected an array of rows");
            std::vector<double> r;
            for (const auto& e : row) {
                if (!e.is_number()) invalid(where + ".matrix", "expected numbers");
                r.push_back(e.get<double>());
            }
            p.matrix.push_back(std::move(r));
        }
    } else if (kind == "logistic") {
        check_keys(j, {"kind", "samples", "features", "l2_penalty", "data_seed", "label_noise"}, where);
        p.kind = ProblemKind::logistic;
        p.samples = get_unsigned(j, "samples", p.samples, where);
        p.features = get_unsigned(j, "features", p.features, where);
        p.l2_penalty = get_number(j, "l2_penalty", p.l2_penalty, where);
        p.data_seed = get_unsigned(j, "data_seed", p.data_seed, where);
        p.label_noise = get_number(j, "label_noise", p.label_noise, where);
    } else if (kind == "cubic") {
        check_keys(j, {"kind", "linear", "quadratic", "cubic"}, where);
        p.kind = ProblemKind::cubic;
        p.linear = get_vector(j, "linear", where);
        p.quadratic = get_vector(j, "quadratic", where);
        p.cubic = get_vector(j, "cubic", where);
    } else {
        invalid(where + ".kind", "unknown problem '" + kind + "'");
    }
    return p;
}

PostProcessor post_from_json(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "identity") return Identity{};
        if (s == "sign") return SignSgd{};
        invalid(where, "unknown post_processor '" + s + "'");
    }
    if (j.is_object()) {
        check_keys(j, {"clip", "mask"}, where);
        if (j.size() != 1) invalid(where, "expected exactly one of 'clip' or 'mask'");
        if (const json* c = find(j, "clip")) {
            if (!c->is_number() || !(c->get<double>() > 0.0)) invalid(where + ".clip", "expected a number > 0");
            return ClipToNorm{c->get<double>()};
        }
        Mask m;
        if (!j.at("mask").is_array()) invalid(where + ".mask", "expected an array of 0/1");
        for (const auto& e : j.at("mask")) {
            if (!e.is_number_integer() || (e.get<int>() != 0 && e.get<int>() != 1)) {
                invalid(where + ".mask", "expected an array of 0/1");
            }
            m.keep.push_back(e.get<int>() == 1);
        }
        return m;
    }
    invalid(where, "expected a string or an object");
}

OptimizerSpec optimizer_from_json(const json& j, const std::string& where) {
    if (!j.is_object()) invalid(where, "expected an object");
    OptimizerSpec o;
    const std::string kind = get_string(j, "kind", where);
    if (kind == "sgd") {
        check_keys(j, {"kind", "lr", "momentum", "weight_decay", "post_processor"}, where);
        o.kind = OptimizerKind::sgd;
        o.momentum = get_number(j, "momentum", o.momentum, where);
    } else if (kind == "adamw") {
        check_keys(j, {"kind", "lr", "beta1", "beta2", "epsilon", "weight_decay", "post_processor"}, where);
        o.kind = OptimizerKind::adamw;
        o.beta1 = get_number(j, "beta1", o.beta1, where);
        o.beta2 = get_number(j, "beta2", o.beta2, where);
        o.epsilon = get_number(j, "epsilon", o.epsilon, where);
    } else {
        invalid(where + ".kind", "unknown optimizer '" + kind + "'");
    }
    o.lr = get_number(j, "lr", o.lr, where);
    o.weight_decay = get_number(j, "weight_decay", o.weight_decay, where);
    if (const json* pp = find(j, "post_processor")) o.post = post_from_json(*pp, where + ".post_processor");
    return o;
}

GenSettings gen_from_json(const json& j, const std::string& where) {
    check_keys(j,
               {"eta0", "gamma", "phi", "r2_threshold", "probe_points", "decay", "horizon", "clamp_ratio",
                "estimator", "auto_eta0"},
               where);
    GenSettings g;
    g.eta0 = get_number(j, "eta0", g.eta0, where);
    g.gamma = get_number(j, "gamma", g.gamma, where);
    g.phi = get_unsigned(j, "phi", g.phi, where);
    g.r2_threshold = get_number(j, "r2_threshold", g.r2_threshold, where);
    g.probe_points = static_cast<int>(get_unsigned(j, "probe_points", 3, where));
    g.decay_enabled = get_bool(j, "decay", g.decay_enabled, where);
    if (find(j, "horizon")) g.horizon = get_unsigned(j, "horizon", 0, where);
    g.clamp_ratio = get_number(j, "clamp_ratio", g.clamp_ratio, where);
    g.auto_eta0 = get_bool(j, "auto_eta0", g.auto_eta0, where);
    if (find(j, "estimator")) {
        const auto e = get_string(j, "estimator", where);
        if (e == "fit") {
            g.estimator = Estimator::curve_fit;
        } else if (e == "hvp") {
            g.estimator = Estimator::exact_hvp;
        } else {
            invalid(where + ".estimator", "expected 'fit' or 'hvp'");
        }
    }
    return g;
}

json post_to_json(const PostProcessor& pp) {
    if (std::holds_alternative<Identity>(pp)) return "identity";
    if (std::holds_alternative<SignSgd>(pp)) return "sign";
    if (const auto* c = std::get_if<ClipToNorm>(&pp)) return json{{"clip", c->max_norm}};
    json mask = json::array();
    for (bool k : std::get<Mask>(pp).keep) mask.push_back(k ? 1 : 0);
    return json{{"mask", mask}};
}

}  // namespace

const char* to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::rosenbrock: return "rosenbrock";
        case ProblemKind::beale: return "beale";
        case ProblemKind::quadratic: return "quadratic";
        case ProblemKind::logistic: return "logistic";
        case ProblemKind::cubic: return "cubic";
    }
    return "unknown";
}

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adamw"; }

ExperimentSpec experiment_from_json(const json& j, const std::string& where) {
    check_keys(j, {"name", "problem", "optimizer", "gen", "start", "iterations", "seed", "log_every", "batch_size",
                   "base"},
               where);
    ExperimentSpec s;
    s.name = get_string(j, "name", where);
    if (s.name.empty()) invalid(where + ".name", "must be non-empty");
    const json* problem = find(j, "problem");
    if (!problem) invalid(where, "missing required key 'problem'");
    s.problem = problem_from_json(*problem, where + ".problem");
    if (const json* opt = find(j, "optimizer")) s.optimizer = optimizer_from_json(*opt, where + ".optimizer");
    if (const json* gen = find(j, "gen")) s.gen = gen_from_json(*gen, where + ".gen");
    if (find(j, "start")) {
        try {
            s.start_point = ParamVector(get_vector(j, "start", where));
        } catch (const NonFiniteValue&) {
            invalid(where + ".start", "non-finite entry");
        }
    } else if (s.problem.kind == ProblemKind::rosenbrock || s.problem.kind == ProblemKind::beale) {
        s.start_point = default_start(s.problem.kind);
    } else {
        s.start_point = ParamVector::zeros(s.problem.dimension());
    }
    s.iterations = get_unsigned(j, "iterations", s.iterations, where);
    s.seed = get_unsigned(j, "seed", s.seed, where);
    s.log_every = get_unsigned(j, "log_every", s.log_every, where);
    s.batch_size = get_unsigned(j, "batch_size", s.batch_size, where);
    try {
        s.validate();
        // Problems validate their own data (SPD matrix, coefficient lengths).
        (void)make_problem(s.problem);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        invalid(where, e.what());
    }
    return s;
}

json to_json(const ExperimentSpec& s) {
    json problem{{"kind", to_string(s.problem.kind)}};
    switch (s.problem.kind) {
        case ProblemKind::quadratic:
            problem["matrix"] = s.problem.matrix;
            problem["offset"] = s.problem.offset;
            break;
        case ProblemKind::logistic:
            problem["samples"] = s.problem.samples;
            problem["features"] = s.problem.features;
            problem["l2_penalty"] = s.problem.l2_penalty;
            problem["data_seed"] = s.problem.data_seed;
            problem["label_noise"] = s.problem.label_noise;
            break;
        case ProblemKind::cubic:
            problem["linear"] = s.problem.linear;
            problem["quadratic"] = s.problem.quadratic;
            problem["cubic"] = s.problem.cubic;
            break;
        default: break;
    }
    json optimizer{{"kind", to_string(s.optimizer.kind)},
                   {"lr", s.optimizer.lr},
                   {"weight_decay", s.optimizer.weight_decay},
                   {"post_processor", post_to_json(s.optimizer.post)}};
    if (s.optimizer.kind == OptimizerKind::sgd) {
        optimizer["momentum"] = s.optimizer.momentum;
    } else {
        optimizer["beta1"] = s.optimizer.beta1;
        optimizer["beta2"] = s.optimizer.beta2;
        optimizer["epsilon"] = s.optimizer.epsilon;
    }
    json j{{"name", s.name},
           {"problem", problem},
           {"optimizer", optimizer},
           {"start", s.start_point.to_std()},
           {"iterations", s.iterations},
           {"seed", s.seed},
           {"log_every", s.log_every},
           {"batch_size", s.batch_size}};
    if (s.gen) {
        const auto& g = *s.gen;
        json gen{{"eta0", g.eta0},
                 {"gamma", g.gamma},
                 {"phi", g.phi},
                 {"r2_threshold", g.r2_threshold},
                 {"probe_points", g.probe_points},
                 {"decay", g.decay_enabled},
                 {"clamp_ratio", g.clamp_ratio},
                 {"estimator", g.estimator == Estimator::curve_fit ? "fit" : "hvp"},
                 {"auto_eta0", g.auto_eta0}};
        if (g.horizon) gen["horizon"] = *g.horizon;
        j["gen"] = gen;
    }
    return j;
}

Config parse_config(const json& doc) {
    check_keys(doc, {"format_version", "output_dir", "experiments"}, "config");
    Config c;
    const json* version = find(doc, "format_version");
    if (!version) invalid("config", "missing required key 'format_version'");
    if (!version->is_number_integer() || version->get<int>() != kFormatVersion) {
        throw ConfigError("E_CONFIG_VERSION",
                          "config.format_version: unsupported version, expected " + std::to_string(kFormatVersion));
    }
    if (const json* out = find(doc, "output_dir")) {
        if (!out->is_string()) invalid("config.output_dir", "expected a string");
        c.output_dir = out->get<std::string>();
    }
    const json* exps = find(doc, "experiments");
    if (!exps || !exps->is_array()) invalid("config", "'experiments' must be an array");
    if (exps->empty()) throw ConfigError("E_CONFIG_NO_EXPERIMENTS", "config: no experiments");

    std::set<std::string> names;
    for (std::size_t i = 0; i < exps->size(); ++i) {
        const std::string where = "experiments[" + std::to_string(i) + "]";
        const json& e = (*exps)[i];
        ExperimentEntry entry{experiment_from_json(e, where), std::nullopt};
        if (const json* base = find(e, "base")) {
            if (!base->is_string()) invalid(where + ".base", "expected a string");
            entry.base = base->get<std::string>();
        }
        if (!names.insert(entry.spec.name).second) {
            invalid(where + ".name", "duplicate experiment name '" + entry.spec.name + "'");
        }
        c.experiments.push_back(std::move(entry));
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("E_CONFIG_READ", "cannot read config '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("E_CONFIG_PARSE", path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

}  // namespace genopt::cli
