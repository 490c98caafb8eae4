#include "dfvote/config.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "dfvote/errors.hpp"

namespace dfvote {
namespace {

using nlohmann::json;

std::string escape_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~')
            out += "~0";
        else if (c == '/')
            out += "~1";
        else
            out += c;
    }
    return out;
}

// Character iterator that tracks how far the parser has read. The count of
// newlines excludes the character read last, because the lexer reads one
// character past a number before the value event fires.
class CountingIterator {
public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    CountingIterator() = default;
    CountingIterator(const char* p, std::size_t* consumed, const char* begin)
        : p_(p), consumed_(consumed), begin_(begin) {}

    reference operator*() const { return *p_; }
    CountingIterator& operator++() {
        ++p_;
        if (consumed_) *consumed_ = std::max(*consumed_, static_cast<std::size_t>(p_ - begin_));
        return *this;
    }
    CountingIterator operator++(int) {
        auto copy = *this;
        ++*this;
        return copy;
    }
    bool operator==(const CountingIterator& o) const { return p_ == o.p_; }

private:
    const char* p_ = nullptr;
    std::size_t* consumed_ = nullptr;
    const char* begin_ = nullptr;
};

class LineTrackingSax {
public:
    LineTrackingSax(json& root, const std::string& text, const std::size_t& consumed, LineMap& lines)
        : dom_(root), text_(text), consumed_(consumed), lines_(lines) {}

    bool null() { return value([&] { return dom_.null(); }); }
    bool boolean(bool v) { return value([&] { return dom_.boolean(v); }); }
    bool number_integer(json::number_integer_t v) { return value([&] { return dom_.number_integer(v); }); }
    bool number_unsigned(json::number_unsigned_t v) { return value([&] { return dom_.number_unsigned(v); }); }
    bool number_float(json::number_float_t v, const std::string& s) {
        return value([&] { return dom_.number_float(v, s); });
    }
    bool string(std::string& v) { return value([&] { return dom_.string(v); }); }
    bool binary(json::binary_t& v) { return value([&] { return dom_.binary(v); }); }

    bool start_object(std::size_t len) {
        record();
        frames_.push_back({false, 0, {}});
        return dom_.start_object(len);
    }
    bool key(std::string& k) {
        frames_.back().key = k;
        return dom_.key(k);
    }
    bool end_object() {
        frames_.pop_back();
        return dom_.end_object();
    }
    bool start_array(std::size_t len) {
        record();
        frames_.push_back({true, 0, {}});
        return dom_.start_array(len);
    }
    bool end_array() {
        frames_.pop_back();
        return dom_.end_array();
    }
    bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception& ex) {
        throw ConfigError(std::string("config is not valid JSON: ") + ex.what(), current_line());
    }

private:
    struct Frame {
        bool array;
        std::size_t index;
        std::string key;
    };

    int current_line() const {
        const std::size_t upto = consumed_ > 0 ? consumed_ - 1 : 0;
        int line = 1;
        for (std::size_t i = 0; i < upto && i < text_.size(); ++i)
            if (text_[i] == '\n') ++line;
        return line;
    }

    void record() {
        std::string ptr;
        for (auto& f : frames_) {
            if (f.array)
                ptr += "/" + std::to_string(&f == &frames_.back() ? f.index : f.index - 1);
            else
                ptr += "/" + escape_token(f.key);
        }
        if (!frames_.empty() && frames_.back().array) ++frames_.back().index;
        lines_[ptr] = current_line();
    }

    template <class F>
    bool value(F&& f) {
        record();
        return f();
    }

    nlohmann::detail::json_sax_dom_parser<json> dom_;
    const std::string& text_;
    const std::size_t& consumed_;
    LineMap& lines_;
    std::vector<Frame> frames_;
};

int line_of(const LineMap& lines, const std::string& pointer) {
    // Fall back to the nearest enclosing value that has a recorded line.
    std::string p = pointer;
    while (true) {
        auto it = lines.find(p);
        if (it != lines.end()) return it->second;
        if (p.empty()) return 0;
        p = p.substr(0, p.rfind('/'));
    }
}

[[noreturn]] void fail(const LineMap& lines, const std::string& pointer, const std::string& message) {
    const std::string where = pointer.empty() ? "config" : pointer;
    throw ConfigError(where + ": " + message, line_of(lines, pointer));
}

// Re-anchors errors raised by domain constructors to the config line.
template <class F>
auto anchored(const LineMap& lines, const std::string& pointer, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError& e) {
        if (e.line() != 0) throw;
        fail(lines, pointer, e.what());
    }
}

const json& require(const json& j, const std::string& key, const LineMap& lines, const std::string& pointer) {
    if (!j.is_object()) fail(lines, pointer, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(lines, pointer, "missing required key '" + key + "'");
    return *it;
}

double number(const json& j, const LineMap& lines, const std::string& pointer) {
    if (!j.is_number()) fail(lines, pointer, "expected a number");
    return j.get<double>();
}

std::int64_t integer(const json& j, const LineMap& lines, const std::string& pointer) {
    if (!j.is_number_integer()) fail(lines, pointer, "expected an integer");
    return j.get<std::int64_t>();
}

std::vector<double> vector_of(const json& j, const LineMap& lines, const std::string& pointer) {
    if (!j.is_array()) fail(lines, pointer, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], lines, pointer + "/" + std::to_string(i)));
    return out;
}

Eigen::MatrixXd matrix_of(const json& j, const LineMap& lines, const std::string& pointer) {
    if (!j.is_array() || j.empty()) fail(lines, pointer, "expected a nonempty array of rows");
    const auto rows = j.size();
    Eigen::MatrixXd m;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = vector_of(j[r], lines, pointer + "/" + std::to_string(r));
        if (r == 0) m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(row.size()));
        if (static_cast<Eigen::Index>(row.size()) != m.cols())
            fail(lines, pointer + "/" + std::to_string(r), "rows must have equal length");
        for (std::size_t c = 0; c < row.size(); ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    }
    return m;
}

std::string string_of(const json& j, const LineMap& lines, const std::string& pointer) {
    if (!j.is_string()) fail(lines, pointer, "expected a string");
    return j.get<std::string>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const LineMap& lines,
                const std::string& pointer) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) fail(lines, pointer + "/" + escape_token(it.key()), "unknown key '" + it.key() + "'");
    }
}

ContractionSchedule schedule_from_json(const json& j, const LineMap& lines, const std::string& pointer) {
    const auto type = string_of(require(j, "type", lines, pointer), lines, pointer + "/type");
    if (type == "power_law") {
        check_keys(j, {"type", "coefficients", "exponents"}, lines, pointer);
        const auto exps = vector_of(require(j, "exponents", lines, pointer), lines, pointer + "/exponents");
        std::vector<double> coefs(exps.size(), 1.0);
        if (j.contains("coefficients"))
            coefs = vector_of(j["coefficients"], lines, pointer + "/coefficients");
        return anchored(lines, pointer, [&] { return ContractionSchedule::power_law(coefs, exps); });
    }
    if (type == "explicit") {
        check_keys(j, {"type", "groups"}, lines, pointer);
        const auto& groups = require(j, "groups", lines, pointer);
        if (!groups.is_array()) fail(lines, pointer + "/groups", "expected an array");
        std::vector<GroupSchedule> out;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const std::string gp = pointer + "/groups/" + std::to_string(g);
            const auto& gj = groups[g];
            check_keys(gj, {"regime", "h", "table"}, lines, gp);
            if (!gj.contains("regime")) fail(lines, gp, "explicit sequences must declare a regime");
            ExplicitSequence seq;
            seq.regime = anchored(lines, gp + "/regime", [&] { return parse_regime(string_of(gj["regime"], lines, gp + "/regime")); });
            const auto& table = require(gj, "table", lines, gp);
            if (!table.is_array()) fail(lines, gp + "/table", "expected an array of {n, eps}");
            for (std::size_t r = 0; r < table.size(); ++r) {
                const std::string rp = gp + "/table/" + std::to_string(r);
                const auto size = integer(require(table[r], "n", lines, rp), lines, rp + "/n");
                const auto eps = number(require(table[r], "eps", lines, rp), lines, rp + "/eps");
                if (!seq.eps_by_size.emplace(size, eps).second) fail(lines, rp, "duplicate group size");
            }
            GroupSchedule gs{seq, std::nullopt};
            if (gj.contains("h")) gs.critical_constant = number(gj["h"], lines, gp + "/h");
            out.push_back(std::move(gs));
        }
        return anchored(lines, pointer, [&] { return ContractionSchedule(std::move(out)); });
    }
    fail(lines, pointer + "/type", "unknown schedule type '" + type + "' (power_law or explicit)");
}

GroupStructure groups_from_json(const json& j, const LineMap& lines, const std::string& pointer) {
    if (j.is_number_integer()) {
        const auto m = j.get<std::int64_t>();
        if (m < 1) fail(lines, pointer, "group count must be positive");
        return GroupStructure::equal(static_cast<int>(m));
    }
    check_keys(j, {"proportions"}, lines, pointer);
    const auto props = vector_of(require(j, "proportions", lines, pointer), lines, pointer + "/proportions");
    return anchored(lines, pointer, [&] { return GroupStructure(props); });
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

ParsedDocument parse_document(const std::string& text) {
    ParsedDocument doc;
    std::size_t consumed = 0;
    LineTrackingSax sax(doc.value, text, consumed, doc.lines);
    CountingIterator first(text.data(), &consumed, text.data());
    CountingIterator last(text.data() + text.size(), nullptr, text.data());
    json::sax_parse(first, last, &sax);
    return doc;
}

BaseMeasure measure_from_json(const json& j, const LineMap& lines, const std::string& pointer) {
    const auto type = string_of(require(j, "type", lines, pointer), lines, pointer + "/type");
    if (type == "point_mass") {
        check_keys(j, {"type", "location"}, lines, pointer);
        auto loc = vector_of(require(j, "location", lines, pointer), lines, pointer + "/location");
        return anchored(lines, pointer, [&] { return BaseMeasure::point_mass(loc); });
    }
    if (type == "point_masses") {
        check_keys(j, {"type", "atoms"}, lines, pointer);
        const auto& atoms = require(j, "atoms", lines, pointer);
        if (!atoms.is_array()) fail(lines, pointer + "/atoms", "expected an array");
        std::vector<RealVector> locs;
        std::vector<double> weights;
        for (std::size_t a = 0; a < atoms.size(); ++a) {
            const std::string ap = pointer + "/atoms/" + std::to_string(a);
            check_keys(atoms[a], {"location", "weight"}, lines, ap);
            locs.push_back(vector_of(require(atoms[a], "location", lines, ap), lines, ap + "/location"));
            weights.push_back(number(require(atoms[a], "weight", lines, ap), lines, ap + "/weight"));
        }
        return anchored(lines, pointer, [&] { return BaseMeasure::point_masses(locs, weights); });
    }
    if (type == "uniform_box") {
        check_keys(j, {"type", "lower", "upper"}, lines, pointer);
        auto lo = vector_of(require(j, "lower", lines, pointer), lines, pointer + "/lower");
        auto hi = vector_of(require(j, "upper", lines, pointer), lines, pointer + "/upper");
        return anchored(lines, pointer, [&] { return BaseMeasure::uniform_box(lo, hi); });
    }
    if (type == "gaussian") {
        check_keys(j, {"type", "mean", "covariance"}, lines, pointer);
        auto mean = vector_of(require(j, "mean", lines, pointer), lines, pointer + "/mean");
        auto cov = matrix_of(require(j, "covariance", lines, pointer), lines, pointer + "/covariance");
        return anchored(lines, pointer, [&] { return BaseMeasure::gaussian(mean, cov); });
    }
    if (type == "product") {
        check_keys(j, {"type", "factors"}, lines, pointer);
        const auto& fs = require(j, "factors", lines, pointer);
        if (!fs.is_array()) fail(lines, pointer + "/factors", "expected an array");
        std::vector<BaseMeasure> factors;
        for (std::size_t f = 0; f < fs.size(); ++f)
            factors.push_back(measure_from_json(fs[f], lines, pointer + "/factors/" + std::to_string(f)));
        return anchored(lines, pointer, [&] { return BaseMeasure::product(factors); });
    }
    if (type == "mixture") {
        check_keys(j, {"type", "components"}, lines, pointer);
        const auto& cs = require(j, "components", lines, pointer);
        if (!cs.is_array()) fail(lines, pointer + "/components", "expected an array");
        std::vector<BaseMeasure> comps;
        std::vector<double> weights;
        for (std::size_t c = 0; c < cs.size(); ++c) {
            const std::string cp = pointer + "/components/" + std::to_string(c);
            check_keys(cs[c], {"weight", "measure"}, lines, cp);
            weights.push_back(number(require(cs[c], "weight", lines, cp), lines, cp + "/weight"));
            comps.push_back(measure_from_json(require(cs[c], "measure", lines, cp), lines, cp + "/measure"));
        }
        return anchored(lines, pointer, [&] { return BaseMeasure::mixture(comps, weights); });
    }
    fail(lines, pointer + "/type", "unknown measure type '" + type + "'");
}

CouplingSpec coupling_from_json(const json& j, const LineMap& lines, const std::string& pointer) {
    if (j.contains("beta") == j.contains("coupling"))
        fail(lines, pointer, "give exactly one of 'beta' or 'coupling'");
    if (j.contains("beta")) {
        const double beta = number(j["beta"], lines, pointer + "/beta");
        return anchored(lines, pointer + "/beta", [&] { return CouplingSpec::single_group(beta); });
    }
    auto m = matrix_of(j["coupling"], lines, pointer + "/coupling");
    return anchored(lines, pointer + "/coupling", [&] { return CouplingSpec::from_matrix(m); });
}

DeFinettiModel model_from_json(const json& j, const LineMap& lines, const std::string& pointer) {
    if (!j.is_object()) fail(lines, pointer, "model must be an object");
    check_keys(j, {"groups", "sequence", "bias_map"}, lines, pointer);
    const auto& seq = require(j, "sequence", lines, pointer);
    const std::string sp = pointer + "/sequence";
    const auto type = string_of(require(seq, "type", lines, sp), lines, sp + "/type");
    std::optional<BiasMap> bias;
    if (j.contains("bias_map"))
        bias = anchored(lines, pointer + "/bias_map",
                        [&] { return BiasMap::parse(string_of(j["bias_map"], lines, pointer + "/bias_map")); });

    DeFinettiSequence sequence = StaticSequence{BaseMeasure::point_mass({0.0})};
    int dimension = 0;
    if (type == "static") {
        check_keys(seq, {"type", "base"}, lines, sp);
        auto base = measure_from_json(require(seq, "base", lines, sp), lines, sp + "/base");
        dimension = base.dimension();
        sequence = StaticSequence{std::move(base)};
    } else if (type == "contracted") {
        check_keys(seq, {"type", "base", "schedule"}, lines, sp);
        auto base = measure_from_json(require(seq, "base", lines, sp), lines, sp + "/base");
        auto schedule = schedule_from_json(require(seq, "schedule", lines, sp), lines, sp + "/schedule");
        dimension = base.dimension();
        sequence = ContractedSequence{std::move(base), std::move(schedule)};
    } else if (type == "curie_weiss") {
        check_keys(seq, {"type", "beta", "coupling"}, lines, sp);
        auto coupling = coupling_from_json(seq, lines, sp);
        dimension = coupling.groups();
        sequence = CurieWeissSequence{std::move(coupling)};
        if (!bias) bias = BiasMap(BiasMapKind::tanh);
    } else {
        fail(lines, sp + "/type", "unknown sequence type '" + type + "' (static, contracted or curie_weiss)");
    }
    if (!bias) bias = BiasMap(BiasMapKind::clamp_identity);
    auto groups = j.contains("groups") ? groups_from_json(j["groups"], lines, pointer + "/groups")
                                       : GroupStructure::equal(dimension);
    return anchored(lines, pointer, [&] { return DeFinettiModel(std::move(groups), std::move(sequence), *bias); });
}

ExperimentConfig parse_config(const std::string& text) {
    const auto doc = parse_document(text);
    const auto& j = doc.value;
    const auto& lines = doc.lines;
    if (!j.is_object()) fail(lines, "", "config must be a JSON object");
    check_keys(j, {"experiment", "model", "n", "n_grid", "count", "seed", "output_dir", "thresholds", "delta", "input"},
               lines, "");
    ExperimentConfig c;
    if (j.contains("experiment")) {
        c.experiment = string_of(j["experiment"], lines, "/experiment");
        if (std::find(kExperimentKinds.begin(), kExperimentKinds.end(), c.experiment) == kExperimentKinds.end())
            fail(lines, "/experiment", "unknown experiment '" + c.experiment + "'");
    }
    if (!j.contains("seed")) fail(lines, "", "missing required key 'seed' (seeds are mandatory)");
    if (!j["seed"].is_number_unsigned()) fail(lines, "/seed", "seed must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("model")) {
        c.model = j["model"];
        (void)model_from_json(c.model, lines, "/model");
    }
    if (j.contains("n")) {
        c.n = integer(j["n"], lines, "/n");
        if (*c.n < 2) fail(lines, "/n", "n must be at least 2");
    }
    if (j.contains("n_grid")) {
        const auto& g = j["n_grid"];
        if (!g.is_array()) fail(lines, "/n_grid", "expected an array of integers");
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto v = integer(g[i], lines, "/n_grid/" + std::to_string(i));
            if (v < 2) fail(lines, "/n_grid/" + std::to_string(i), "n must be at least 2");
            c.n_grid.push_back(v);
        }
    }
    if (j.contains("count")) {
        c.count = integer(j["count"], lines, "/count");
        if (c.count < 1) fail(lines, "/count", "count must be at least 1");
    }
    if (j.contains("output_dir")) c.output_dir = string_of(j["output_dir"], lines, "/output_dir");
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        if (!t.is_object()) fail(lines, "/thresholds", "expected an object of numbers");
        for (auto it = t.begin(); it != t.end(); ++it)
            c.thresholds[it.key()] = number(it.value(), lines, "/thresholds/" + escape_token(it.key()));
    }
    if (j.contains("delta")) {
        c.delta = number(j["delta"], lines, "/delta");
        if (!(*c.delta > 0.0)) fail(lines, "/delta", "delta must be positive");
    }
    if (j.contains("input")) c.input = string_of(j["input"], lines, "/input");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

nlohmann::json to_json(const ExperimentConfig& c) {
    json j;
    if (!c.experiment.empty()) j["experiment"] = c.experiment;
    if (!c.model.is_null()) j["model"] = c.model;
    if (c.n) j["n"] = *c.n;
    if (!c.n_grid.empty()) j["n_grid"] = c.n_grid;
    j["count"] = c.count;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    if (!c.thresholds.empty()) j["thresholds"] = c.thresholds;
    if (c.delta) j["delta"] = *c.delta;
    if (!c.input.empty()) j["input"] = c.input;
    return j;
}

std::string serialize(const ExperimentConfig& config) { return to_json(config).dump(2); }

std::string config_hash(const ExperimentConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(config).dump())));
    return buf;
}

DeFinettiModel build_model(const ExperimentConfig& config) {
    if (config.model.is_null()) throw ConfigError("config has no 'model' section");
    return model_from_json(config.model, {}, "/model");
}

}  // namespace dfvote
