#include "steplab/bench/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "steplab/core/problems.hpp"
#include "steplab/errors.hpp"

namespace steplab::bench {

using json = nlohmann::json;

namespace {

std::string escape(const std::string& key) {
    std::string out;
    for (const char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

// Forward iterator over the config text that publishes how many bytes the
// parser has pulled so far.
struct CountingIter {
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    const char* p = nullptr;
    const char* base = nullptr;
    std::size_t* consumed = nullptr;

    reference operator*() const { return *p; }
    CountingIter& operator++() {
        ++p;
        *consumed = static_cast<std::size_t>(p - base);
        return *this;
    }
    CountingIter operator++(int) {
        CountingIter old = *this;
        ++*this;
        return old;
    }
    bool operator==(const CountingIter& o) const { return p == o.p; }
};

// Builds the DOM while recording the source line of every object key and
// array element, addressed by JSON pointer.
class LocatingSax {
public:
    LocatingSax(json& root, const std::string& text, const std::size_t& consumed)
        : dom_(root, true), text_(text), consumed_(consumed) {}

    bool null() { return element(), dom_.null(), finish(); }
    bool boolean(bool v) { return element(), dom_.boolean(v), finish(); }
    bool number_integer(json::number_integer_t v) { return element(), dom_.number_integer(v), finish(); }
    bool number_unsigned(json::number_unsigned_t v) { return element(), dom_.number_unsigned(v), finish(); }
    bool number_float(json::number_float_t v, const json::string_t& s) {
        return element(), dom_.number_float(v, s), finish();
    }
    bool string(json::string_t& v) { return element(), dom_.string(v), finish(); }
    bool binary(json::binary_t& v) { return element(), dom_.binary(v), finish(); }
    bool start_object(std::size_t n) {
        element();
        frames_.push_back({false, 0, {}});
        return dom_.start_object(n);
    }
    bool key(json::string_t& k) {
        frames_.back().key = k;
        lines_[path()] = current_line();
        return dom_.key(k);
    }
    bool end_object() {
        frames_.pop_back();
        dom_.end_object();
        return finish();
    }
    bool start_array(std::size_t n) {
        element();
        frames_.push_back({true, 0, {}});
        return dom_.start_array(n);
    }
    bool end_array() {
        frames_.pop_back();
        dom_.end_array();
        return finish();
    }
    bool parse_error(std::size_t pos, const std::string& /*tok*/, const nlohmann::detail::exception& ex) {
        error_ = {pos, ex.what()};
        return false;
    }

    // Byte position and message of the syntax error, if parsing stopped on one.
    const std::optional<std::pair<std::size_t, std::string>>& error() const { return error_; }

    std::map<std::string, int> take_lines() { return std::move(lines_); }

private:
    struct Frame {
        bool is_array;
        std::size_t index;
        std::string key;
    };

    int current_line() const {
        const std::size_t end = std::min(consumed_ == 0 ? 0 : consumed_ - 1, text_.size());
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
    }

    std::string path() const {
        std::string out;
        for (const auto& f : frames_) {
            out += '/';
            out += f.is_array ? std::to_string(f.index) : escape(f.key);
        }
        return out;
    }

    void element() {
        if (!frames_.empty() && frames_.back().is_array) {
            lines_[path()] = current_line();
        }
    }

    bool finish() {
        if (!frames_.empty() && frames_.back().is_array) {
            ++frames_.back().index;
        }
        return true;
    }

    nlohmann::detail::json_sax_dom_parser<json> dom_;
    const std::string& text_;
    const std::size_t& consumed_;
    std::vector<Frame> frames_;
    std::map<std::string, int> lines_;
    std::optional<std::pair<std::size_t, std::string>> error_;
};

int line_at_offset(const std::string& text, std::size_t offset) {
    const std::size_t end = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

class Reader {
public:
    explicit Reader(std::map<std::string, int> lines) : lines_(std::move(lines)) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        std::string p = path;
        while (true) {
            if (auto it = lines_.find(p); it != lines_.end()) {
                throw ConfigError(msg, it->second);
            }
            if (p.empty()) {
                break;
            }
            p.erase(p.rfind('/'));
        }
        throw ConfigError(msg, std::nullopt);
    }

    void only_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed,
                   const std::string& what) const {
        if (!obj.is_object()) {
            fail(path, what + " must be an object");
        }
        for (const auto& [k, v] : obj.items()) {
            if (!allowed.contains(k)) {
                std::string list;
                for (const auto& a : allowed) {
                    list += (list.empty() ? "" : ", ") + a;
                }
                fail(path + "/" + escape(k), "unknown key '" + k + "' in " + what + " (allowed: " + list + ")");
            }
        }
    }

    double number(const json& v, const std::string& path) const {
        if (!v.is_number()) {
            fail(path, "'" + leaf(path) + "' must be a number");
        }
        return v.get<double>();
    }

    double positive(const json& v, const std::string& path) const {
        const double x = number(v, path);
        if (!(x > 0.0) || !std::isfinite(x)) {
            fail(path, "'" + leaf(path) + "' must be positive");
        }
        return x;
    }

    double nonnegative(const json& v, const std::string& path) const {
        const double x = number(v, path);
        if (!(x >= 0.0) || !std::isfinite(x)) {
            fail(path, "'" + leaf(path) + "' must be nonnegative");
        }
        return x;
    }

    std::uint64_t unsigned_int(const json& v, const std::string& path, std::uint64_t min = 0) const {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            fail(path, "'" + leaf(path) + "' must be a nonnegative integer");
        }
        const auto x = v.get<std::uint64_t>();
        if (x < min) {
            fail(path, "'" + leaf(path) + "' must be >= " + std::to_string(min));
        }
        return x;
    }

    std::string string(const json& v, const std::string& path) const {
        if (!v.is_string()) {
            fail(path, "'" + leaf(path) + "' must be a string");
        }
        return v.get<std::string>();
    }

    bool boolean(const json& v, const std::string& path) const {
        if (!v.is_boolean()) {
            fail(path, "'" + leaf(path) + "' must be true or false");
        }
        return v.get<bool>();
    }

private:
    static std::string leaf(const std::string& path) { return path.substr(path.rfind('/') + 1); }

    std::map<std::string, int> lines_;
};

const std::map<std::string, std::set<std::string>>& optimizer_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"sgd", {"gamma"}},
        {"sgd-optimal-rate", {"distance", "lipschitz"}},
        {"adagrad-norm", {"distance"}},
        {"dadapt-sgd", {"d0", "phi"}},
        {"sgd-pls", {"gamma0", "c1", "c2", "c_w", "var_samples"}},
        {"sgd-pls-dadapt",
         {"d0", "phi", "c1", "c2", "c_w", "pls_mode", "d_limit_mode", "var_samples", "fold_search_effort"}},
    };
    return keys;
}

bool valid_label(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    });
}

OptimizerSpec read_optimizer(const Reader& rd, const json& o, const std::string& path) {
    if (!o.is_object()) {
        rd.fail(path, "optimizer entry must be an object");
    }
    if (!o.contains("name")) {
        rd.fail(path, "optimizer entry needs a 'name'");
    }
    OptimizerSpec spec;
    spec.name = rd.string(o["name"], path + "/name");
    const auto it = optimizer_keys().find(spec.name);
    if (it == optimizer_keys().end()) {
        std::string list;
        for (const auto& n : optimizer_names()) {
            list += (list.empty() ? "" : ", ") + n;
        }
        rd.fail(path + "/name", "unknown optimizer '" + spec.name + "' (known: " + list + ")");
    }
    std::set<std::string> allowed = it->second;
    allowed.insert("name");
    allowed.insert("label");
    rd.only_keys(o, path, allowed, "optimizer '" + spec.name + "'");

    spec.label = spec.name;
    for (const auto& [k, v] : o.items()) {
        const std::string p = path + "/" + escape(k);
        if (k == "label") {
            spec.label = rd.string(v, p);
            if (!valid_label(spec.label)) {
                rd.fail(p, "label may only contain letters, digits, '-', '_' and '.'");
            }
        } else if (k == "gamma") {
            spec.gamma = rd.positive(v, p);
        } else if (k == "distance") {
            spec.distance = rd.positive(v, p);
        } else if (k == "lipschitz") {
            spec.lipschitz = rd.positive(v, p);
        } else if (k == "d0") {
            spec.d0 = rd.positive(v, p);
        } else if (k == "phi") {
            spec.phi = rd.positive(v, p);
        } else if (k == "gamma0") {
            spec.gamma0 = rd.positive(v, p);
        } else if (k == "c1") {
            spec.c1 = rd.number(v, p);
        } else if (k == "c2") {
            spec.c2 = rd.number(v, p);
        } else if (k == "c_w") {
            spec.c_w = rd.number(v, p);
        } else if (k == "var_samples") {
            spec.var_samples = rd.unsigned_int(v, p, 2);
        } else if (k == "fold_search_effort") {
            spec.fold_search_effort = rd.boolean(v, p);
        } else if (k == "pls_mode") {
            spec.pls_mode = rd.string(v, p);
            if (spec.pls_mode != "plain" && spec.pls_mode != "d-informed") {
                rd.fail(p, "pls_mode must be 'plain' or 'd-informed'");
            }
        } else if (k == "d_limit_mode") {
            spec.d_limit_mode = rd.string(v, p);
            if (spec.d_limit_mode != "literal-floor" && spec.d_limit_mode != "cap") {
                rd.fail(p, "d_limit_mode must be 'literal-floor' or 'cap'");
            }
        }
    }
    if (spec.name == "sgd" && !spec.gamma) {
        rd.fail(path, "optimizer 'sgd' needs 'gamma'");
    }
    if (!(spec.c1 > 0.0 && spec.c1 < spec.c2 && spec.c2 < 1.0)) {
        rd.fail(path, "Wolfe constants need 0 < c1 < c2 < 1");
    }
    if (!(spec.c_w >= 0.0 && spec.c_w < 1.0)) {
        rd.fail(path, "c_w must lie in [0, 1)");
    }
    return spec;
}

}  // namespace

ConfigError::ConfigError(const std::string& msg, std::optional<int> line)
    : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + msg : msg), line_(line) {}

NoiseModel NoiseSpec::model() const {
    switch (kind) {
        case Kind::additive:
            return AdditiveGaussian{sigma_f, sigma_g};
        case Kind::minibatch:
            return MinibatchNoise{batch_size};
        case Kind::none:
            break;
    }
    return NoNoise{};
}

const std::vector<std::string>& optimizer_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : optimizer_keys()) {
            out.push_back(k);
        }
        return out;
    }();
    return names;
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    std::size_t consumed = 0;
    LocatingSax sax(root, text, consumed);
    CountingIter first{text.data(), text.data(), &consumed};
    CountingIter last{text.data() + text.size(), text.data(), &consumed};
    if (!json::sax_parse(first, last, &sax)) {
        const auto& [pos, what] = *sax.error();
        throw ConfigError("malformed JSON: " + what, line_at_offset(text, pos == 0 ? 0 : pos - 1));
    }
    const Reader rd(sax.take_lines());

    rd.only_keys(root, "", {"problem", "noise", "optimizer", "optimizers", "steps", "seeds", "x0", "output"},
                 "experiment config");
    ExperimentConfig cfg;

    if (root.contains("problem")) {
        const json& p = root["problem"];
        rd.only_keys(p, "/problem", {"name", "p", "seed"}, "problem");
        if (p.contains("name")) {
            cfg.problem.name = rd.string(p["name"], "/problem/name");
        }
        if (p.contains("p")) {
            cfg.problem.p = static_cast<int>(rd.unsigned_int(p["p"], "/problem/p", 1));
        }
        if (p.contains("seed")) {
            cfg.problem.seed = rd.unsigned_int(p["seed"], "/problem/seed");
        }
        const auto names = problem_names();
        if (std::find(names.begin(), names.end(), cfg.problem.name) == names.end()) {
            rd.fail("/problem/name", "unknown problem '" + cfg.problem.name + "'");
        }
    }

    if (root.contains("noise")) {
        const json& n = root["noise"];
        rd.only_keys(n, "/noise", {"kind", "sigma_f", "sigma_g", "batch_size"}, "noise");
        const std::string kind = n.contains("kind") ? rd.string(n["kind"], "/noise/kind") : "none";
        std::set<std::string> allowed{"kind"};
        if (kind == "none") {
            cfg.noise.kind = NoiseSpec::Kind::none;
        } else if (kind == "additive") {
            cfg.noise.kind = NoiseSpec::Kind::additive;
            allowed.insert({"sigma_f", "sigma_g"});
        } else if (kind == "minibatch") {
            cfg.noise.kind = NoiseSpec::Kind::minibatch;
            allowed.insert("batch_size");
        } else {
            rd.fail("/noise/kind", "noise kind must be 'none', 'additive' or 'minibatch'");
        }
        rd.only_keys(n, "/noise", allowed, "noise of kind '" + kind + "'");
        if (n.contains("sigma_f")) {
            cfg.noise.sigma_f = rd.nonnegative(n["sigma_f"], "/noise/sigma_f");
        }
        if (n.contains("sigma_g")) {
            cfg.noise.sigma_g = rd.nonnegative(n["sigma_g"], "/noise/sigma_g");
        }
        if (n.contains("batch_size")) {
            cfg.noise.batch_size = rd.unsigned_int(n["batch_size"], "/noise/batch_size", 1);
        }
    }

    if (root.contains("optimizer") && root.contains("optimizers")) {
        rd.fail("/optimizer", "give either 'optimizer' or 'optimizers', not both");
    }
    if (root.contains("optimizer")) {
        cfg.optimizers.push_back(read_optimizer(rd, root["optimizer"], "/optimizer"));
    } else if (root.contains("optimizers")) {
        const json& arr = root["optimizers"];
        if (!arr.is_array() || arr.empty()) {
            rd.fail("/optimizers", "'optimizers' must be a non-empty array");
        }
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg.optimizers.push_back(read_optimizer(rd, arr[i], "/optimizers/" + std::to_string(i)));
        }
    } else {
        rd.fail("", "config needs 'optimizer' or 'optimizers'");
    }
    std::set<std::string> labels;
    for (std::size_t i = 0; i < cfg.optimizers.size(); ++i) {
        if (!labels.insert(cfg.optimizers[i].label).second) {
            rd.fail("/optimizers/" + std::to_string(i), "duplicate optimizer label '" + cfg.optimizers[i].label +
                                                             "' (set 'label' to disambiguate)");
        }
    }

    if (root.contains("steps")) {
        cfg.steps = rd.unsigned_int(root["steps"], "/steps", 1);
    }
    if (root.contains("seeds")) {
        const json& s = root["seeds"];
        if (!s.is_array() || s.empty()) {
            rd.fail("/seeds", "'seeds' must be a non-empty array of integers");
        }
        cfg.seeds.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            cfg.seeds.push_back(rd.unsigned_int(s[i], "/seeds/" + std::to_string(i)));
        }
    }
    if (root.contains("x0")) {
        const json& x = root["x0"];
        if (!x.is_array() || x.empty()) {
            rd.fail("/x0", "'x0' must be a non-empty array of numbers");
        }
        std::vector<double> v;
        for (std::size_t i = 0; i < x.size(); ++i) {
            v.push_back(rd.number(x[i], "/x0/" + std::to_string(i)));
        }
        if (static_cast<int>(v.size()) != cfg.problem.p) {
            rd.fail("/x0", "'x0' has " + std::to_string(v.size()) + " entries but problem dimension is " +
                               std::to_string(cfg.problem.p));
        }
        cfg.x0 = std::move(v);
    }
    if (root.contains("output")) {
        cfg.output = rd.string(root["output"], "/output");
    }
    if (cfg.noise.kind == NoiseSpec::Kind::minibatch && cfg.problem.name != "logistic-synthetic") {
        rd.fail("/noise/kind", "minibatch noise needs a finite-sum problem (logistic-synthetic)");
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.optimizers.empty()) {
        throw ConfigError("no optimizers configured");
    }
    if (cfg.seeds.empty()) {
        throw ConfigError("no seeds configured");
    }
    if (cfg.steps < 1) {
        throw ConfigError("steps must be >= 1");
    }
    if (cfg.x0 && static_cast<int>(cfg.x0->size()) != cfg.problem.p) {
        throw ConfigError("x0 dimension does not match the problem");
    }
    try {
        const DeterministicProblem prob = make_problem(cfg.problem.name, cfg.problem.p, cfg.problem.seed.value_or(0));
        StochasticOracle check(prob, cfg.noise.model(), 0);
        (void)check;
        for (const auto& o : cfg.optimizers) {
            const bool needs_d = o.name == "sgd-optimal-rate" || o.name == "adagrad-norm";
            if (needs_d && !o.distance && !prob.minimizer) {
                throw ConfigError("optimizer '" + o.label + "' needs 'distance' for problem '" + prob.name + "'");
            }
            if (o.name == "sgd-optimal-rate" && !o.lipschitz && !prob.lipschitz) {
                throw ConfigError("optimizer '" + o.label + "' needs 'lipschitz' for problem '" + prob.name + "'");
            }
        }
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace steplab::bench
