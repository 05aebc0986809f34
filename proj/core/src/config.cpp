#include "etadrc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "etadrc/errors.hpp"

namespace etadrc {

using nlohmann::json;

namespace {

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }
std::vector<double> from_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

DesignGains section5_gains() {
    DesignGains d;
    d.lambdas = {6.0, 12.0, 8.0};
    d.cs = {-1.0, -2.0};
    d.r = 50.0;
    d.theta = 7.0;
    return d;
}

NoiseConfig section5_noise() {
    NoiseConfig noise;
    noise.bounded = make_bounded_noise("sin_t_plus_b", 2.0, 2.0);
    noise.rho1 = 1.5;
    noise.rho2 = 1.5;
    noise.w2_initial = 0.0;
    return noise;
}

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& what) const {
        throw ConfigError(source_ + ": " + path + ": " + what);
    }

    const json& section(const json& root, const char* key, std::initializer_list<const char*> allowed) const {
        const json& s = root.at(key);
        if (!s.is_object()) fail(key, "expected an object");
        check_keys(s, key, allowed);
        return s;
    }

    void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) const {
        for (const auto& [key, _] : obj.items()) {
            if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) != allowed.end())
                continue;
            std::string list;
            for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
            fail(path.empty() ? key : path + "." + key, "unknown key (expected one of: " + list + ")");
        }
    }

    double number(const json& j, const std::string& path) const {
        if (!j.is_number()) fail(path, "expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) fail(path, "expected a finite number");
        return v;
    }

    std::uint64_t unsigned_int(const json& j, const std::string& path) const {
        if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<std::int64_t>() < 0))
            fail(path, "expected a non-negative integer");
        return j.get<std::uint64_t>();
    }

    bool boolean(const json& j, const std::string& path) const {
        if (!j.is_boolean()) fail(path, "expected true or false");
        return j.get<bool>();
    }

    std::string string(const json& j, const std::string& path) const {
        if (!j.is_string()) fail(path, "expected a string");
        return j.get<std::string>();
    }

    std::vector<double> numbers(const json& j, const std::string& path) const {
        if (!j.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::vector<std::string> strings(const json& j, const std::string& path) const {
        if (!j.is_array()) fail(path, "expected an array of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(string(j[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

}  // namespace

std::vector<std::string> preset_names() { return {"paper-sec5", "linear-n2", "silent"}; }

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    SimConfig& s = c.sim;
    s.design = section5_gains();
    s.x0 = Vector{{0.5, -0.5}};
    s.xhat0 = Vector::Zero(3);
    s.step = 1e-4;
    if (name == "paper-sec5") {
        s.spec = preset_system(name);
        s.noise = section5_noise();
        s.horizon = 20.0;
        c.mc_paths = 10;
        c.r_values = {25.0, 50.0, 100.0};
    } else if (name == "linear-n2") {
        s.spec = preset_system(name);
        s.noise = section5_noise();
        s.noise.enabled = false;
        s.horizon = 10.0;
        c.mc_paths = 200;
        c.r_values = {10.0, 20.0, 40.0};
    } else if (name == "silent") {
        s.spec = preset_system(name);
        s.noise.enabled = false;
        s.x0 = Vector::Zero(2);
        s.horizon = 5.0;
        c.mc_paths = 2;
        c.r_values = {10.0, 20.0};
    } else {
        std::string list;
        for (const auto& p : preset_names()) list += (list.empty() ? "" : ", ") + p;
        throw ConfigError("unknown preset '" + name + "' (known: " + list + ")");
    }
    resolve_stride(c);
    return c;
}

void resolve_stride(ExperimentConfig& config) {
    if (config.auto_stride) config.sim.record_stride = default_record_stride(step_count(config.sim));
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return config_from_json(doc, source);
}

ExperimentConfig config_from_json(const json& doc, const std::string& source) {
    const Reader rd(source);
    if (!doc.is_object()) rd.fail("<root>", "expected an object");
    const json* root = &doc;
    if (doc.contains("tool") && doc.contains("config")) root = &doc.at("config");  // run manifest
    if (!root->is_object()) rd.fail("config", "expected an object");
    rd.check_keys(*root, "", {"preset", "system", "gains", "etm", "noise", "simulation", "analysis"});

    ExperimentConfig c = preset_config(root->contains("preset") ? rd.string(root->at("preset"), "preset") : "paper-sec5");
    SimConfig& s = c.sim;

    if (root->contains("system")) {
        const json& sys = rd.section(*root, "system", {"preset", "order", "f", "g", "lipschitz", "alphas"});
        if (sys.contains("preset")) s.spec = preset_system(rd.string(sys.at("preset"), "system.preset"));
        int n = s.spec.n;
        auto f = s.spec.f_name;
        auto g = s.spec.g_names;
        auto lip = s.spec.lipschitz;
        auto alphas = s.spec.alphas;
        if (sys.contains("order")) n = static_cast<int>(rd.unsigned_int(sys.at("order"), "system.order"));
        if (sys.contains("f")) f = rd.string(sys.at("f"), "system.f");
        if (sys.contains("g")) g = rd.strings(sys.at("g"), "system.g");
        if (sys.contains("lipschitz")) lip = rd.numbers(sys.at("lipschitz"), "system.lipschitz");
        if (sys.contains("alphas")) {
            const auto a = rd.numbers(sys.at("alphas"), "system.alphas");
            if (a.size() != 4) rd.fail("system.alphas", "expected 4 numbers");
            std::copy(a.begin(), a.end(), alphas.begin());
        }
        try {
            s.spec = make_system(n, f, g, lip, alphas);
        } catch (const Error& e) {
            rd.fail("system", e.what());
        }
    }
    if (root->contains("gains")) {
        const json& gs = rd.section(*root, "gains", {"lambdas", "cs", "r", "theta"});
        if (gs.contains("lambdas")) s.design.lambdas = rd.numbers(gs.at("lambdas"), "gains.lambdas");
        if (gs.contains("cs")) s.design.cs = rd.numbers(gs.at("cs"), "gains.cs");
        if (gs.contains("r")) s.design.r = rd.number(gs.at("r"), "gains.r");
        if (gs.contains("theta")) s.design.theta = rd.number(gs.at("theta"), "gains.theta");
    }
    if (root->contains("etm")) {
        const json& e = rd.section(*root, "etm", {"eps1", "kappa1", "eps2", "kappa2"});
        if (e.contains("eps1")) s.design.eps1 = rd.number(e.at("eps1"), "etm.eps1");
        if (e.contains("kappa1")) s.design.kappa1 = rd.number(e.at("kappa1"), "etm.kappa1");
        if (e.contains("eps2")) s.design.eps2 = rd.number(e.at("eps2"), "etm.eps2");
        if (e.contains("kappa2")) s.design.kappa2 = rd.number(e.at("kappa2"), "etm.kappa2");
    }
    if (root->contains("noise")) {
        const json& ns =
            rd.section(*root, "noise", {"enabled", "psi", "amplitude", "alpha5", "rho1", "rho2", "w2_initial"});
        auto kind = s.noise.bounded.kind;
        double amplitude = s.noise.bounded.amplitude;
        double alpha5 = s.noise.bounded.alpha5;
        if (ns.contains("enabled")) s.noise.enabled = rd.boolean(ns.at("enabled"), "noise.enabled");
        if (ns.contains("psi")) kind = rd.string(ns.at("psi"), "noise.psi");
        if (ns.contains("amplitude")) amplitude = rd.number(ns.at("amplitude"), "noise.amplitude");
        if (ns.contains("alpha5")) alpha5 = rd.number(ns.at("alpha5"), "noise.alpha5");
        if (ns.contains("rho1")) s.noise.rho1 = rd.number(ns.at("rho1"), "noise.rho1");
        if (ns.contains("rho2")) s.noise.rho2 = rd.number(ns.at("rho2"), "noise.rho2");
        if (ns.contains("w2_initial")) s.noise.w2_initial = rd.number(ns.at("w2_initial"), "noise.w2_initial");
        try {
            s.noise.bounded = make_bounded_noise(kind, amplitude, alpha5);
        } catch (const Error& e) {
            rd.fail("noise", e.what());
        }
    }
    bool xhat0_given = false;
    if (root->contains("simulation")) {
        const json& sim = rd.section(*root, "simulation",
                                     {"x0", "xhat0", "horizon", "step", "step_policy", "record_stride", "seed",
                                      "check_assumptions", "force"});
        if (sim.contains("x0")) s.x0 = to_vector(rd.numbers(sim.at("x0"), "simulation.x0"));
        if (sim.contains("xhat0")) {
            s.xhat0 = to_vector(rd.numbers(sim.at("xhat0"), "simulation.xhat0"));
            xhat0_given = true;
        }
        if (sim.contains("horizon")) s.horizon = rd.number(sim.at("horizon"), "simulation.horizon");
        if (sim.contains("step")) s.step = rd.number(sim.at("step"), "simulation.step");
        if (sim.contains("step_policy")) s.step_policy = rd.boolean(sim.at("step_policy"), "simulation.step_policy");
        if (sim.contains("record_stride")) {
            const json& j = sim.at("record_stride");
            if (j.is_string() && j.get<std::string>() == "auto") {
                c.auto_stride = true;
            } else {
                const auto v = rd.unsigned_int(j, "simulation.record_stride");
                if (v < 1) rd.fail("simulation.record_stride", "must be >= 1 or \"auto\"");
                s.record_stride = static_cast<int>(v);
                c.auto_stride = false;
            }
        }
        if (sim.contains("seed")) s.seed = rd.unsigned_int(sim.at("seed"), "simulation.seed");
        if (sim.contains("check_assumptions"))
            s.check_assumptions = rd.boolean(sim.at("check_assumptions"), "simulation.check_assumptions");
        if (sim.contains("force")) s.force = rd.boolean(sim.at("force"), "simulation.force");
    }
    if (root->contains("analysis")) {
        const json& an = rd.section(*root, "analysis", {"mc_paths", "window_fraction", "r_values"});
        if (an.contains("mc_paths")) c.mc_paths = rd.unsigned_int(an.at("mc_paths"), "analysis.mc_paths");
        if (an.contains("window_fraction"))
            c.window_fraction = rd.number(an.at("window_fraction"), "analysis.window_fraction");
        if (an.contains("r_values")) c.r_values = rd.numbers(an.at("r_values"), "analysis.r_values");
        if (c.mc_paths < 1) rd.fail("analysis.mc_paths", "must be >= 1");
        if (!(c.window_fraction >= 0.0 && c.window_fraction < 1.0))
            rd.fail("analysis.window_fraction", "must be in [0, 1)");
    }
    if (!xhat0_given && s.xhat0.size() != s.spec.n + 1) s.xhat0 = Vector::Zero(s.spec.n + 1);

    resolve_stride(c);
    try {
        check_config(s);
    } catch (const Error& e) {
        throw ConfigError(rd.source() + ": " + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& spec) {
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), spec) != names.end()) return preset_config(spec);
    std::ifstream in(spec);
    if (!in) throw ConfigError("cannot open config '" + spec + "' (not a preset name or readable file)");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), spec);
}

json to_json(const ExperimentConfig& c) {
    const SimConfig& s = c.sim;
    return {
        {"preset", c.preset},
        {"system",
         {{"order", s.spec.n},
          {"f", s.spec.f_name},
          {"g", s.spec.g_names},
          {"lipschitz", s.spec.lipschitz},
          {"alphas", s.spec.alphas}}},
        {"gains", {{"lambdas", s.design.lambdas}, {"cs", s.design.cs}, {"r", s.design.r}, {"theta", s.design.theta}}},
        {"etm",
         {{"eps1", s.design.eps1}, {"kappa1", s.design.kappa1}, {"eps2", s.design.eps2}, {"kappa2", s.design.kappa2}}},
        {"noise",
         {{"enabled", s.noise.enabled},
          {"psi", s.noise.bounded.kind},
          {"amplitude", s.noise.bounded.amplitude},
          {"alpha5", s.noise.bounded.alpha5},
          {"rho1", s.noise.rho1},
          {"rho2", s.noise.rho2},
          {"w2_initial", s.noise.w2_initial}}},
        {"simulation",
         {{"x0", from_vector(s.x0)},
          {"xhat0", from_vector(s.xhat0)},
          {"horizon", s.horizon},
          {"step", s.step},
          {"step_policy", s.step_policy},
          {"record_stride", c.auto_stride ? json("auto") : json(s.record_stride)},
          {"seed", s.seed},
          {"check_assumptions", s.check_assumptions},
          {"force", s.force}}},
        {"analysis", {{"mc_paths", c.mc_paths}, {"window_fraction", c.window_fraction}, {"r_values", c.r_values}}},
    };
}

}  // namespace etadrc
