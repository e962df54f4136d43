#include "fmig/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#ifndef FMIG_VERSION
#define FMIG_VERSION "0.0.0"
#endif

namespace fmig {

std::string version() { return FMIG_VERSION; }

std::string config_hash(const json& doc) {
    const std::string text = doc.dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& item : obj.items())
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
}

namespace {

json perm_json(const std::vector<std::size_t>& perm) { return json(perm); }

json restarts_json(const std::vector<RestartOutcome>& restarts) {
    json out = json::array();
    for (const auto& r : restarts) {
        json j{{"index", r.index}, {"aborted", r.aborted}, {"objective", r.objective}, {"iterations", r.iterations}};
        if (r.aborted) j["abort_reason"] = r.abort_reason;
        out.push_back(std::move(j));
    }
    return out;
}

std::vector<Simplex> rows_from_json(const json& doc, const std::string& what) {
    if (!doc.is_array() || doc.empty()) throw std::invalid_argument(what + ": expected a non-empty array of rows");
    std::vector<Simplex> rows;
    for (const auto& r : doc) rows.emplace_back(r.get<std::vector<double>>());
    return rows;
}

std::size_t size_field(const json& doc, const char* key) {
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
        throw std::invalid_argument(std::string("prior: '") + key + "' must be a positive integer");
    return v.get<std::size_t>();
}

std::optional<std::size_t> parse_signal(const std::string& field, std::size_t line) {
    if (field.empty()) return std::nullopt;
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw std::invalid_argument("samples line " + std::to_string(line) + ": bad signal '" + field + "'");
    return v;
}

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

}  // namespace

json to_json(const Simplex& s) { return json(s.vec()); }

json to_json(const Hypothesis& h) {
    json out = json::array();
    for (const auto& r : h.rows()) out.push_back(r.vec());
    return out;
}

json to_json(const TripletPrior& prior) {
    json ca = json::array(), cb = json::array();
    for (const auto& r : prior.cond_a()) ca.push_back(r.vec());
    for (const auto& r : prior.cond_b()) cb.push_back(r.vec());
    return json{{"sigma_a", prior.sigma_a()}, {"sigma_b", prior.sigma_b()}, {"sigma_y", prior.sigma_y()},
                {"prior_y", prior.prior_y().vec()}, {"cond_a", ca}, {"cond_b", cb}};
}

json to_json(const OptimizerConfig& cfg) {
    return json{{"restarts", cfg.restarts},   {"max_iters", cfg.max_iters},
                {"step_size", cfg.step_size}, {"tolerance", cfg.tolerance},
                {"seed", cfg.seed},           {"optimize_p", cfg.optimize_p},
                {"threads", cfg.threads},     {"record_curve", cfg.record_curve}};
}

json to_json(const CotrainResult& r) {
    return json{{"h_a", to_json(r.h_a_star)},
                {"h_b", to_json(r.h_b_star)},
                {"p", to_json(r.p_star)},
                {"objective", r.objective},
                {"best_restart", r.best_restart},
                {"permutation", perm_json(r.permutation)},
                {"aligned_tv_distance", r.aligned_tv_distance},
                {"restarts", restarts_json(r.restarts)}};
}

json to_json(const LikelihoodTable& v) { return json(v.rows()); }

json to_json(const PsGainResult& r) {
    return json{{"h_a", to_json(r.h_a_star)},
                {"v_b", to_json(r.v_b_star)},
                {"objective", r.objective},
                {"best_restart", r.best_restart},
                {"permutation", perm_json(r.permutation)},
                {"aligned_tv_distance", r.aligned_tv_distance},
                {"restarts", restarts_json(r.restarts)}};
}

json to_json(const StabilityReport& r) {
    return json{{"stable", r.stable}, {"rank_a", r.rank_a}, {"rank_b", r.rank_b}};
}

json to_json(const WellDefinedReport& r) {
    json w = json::array();
    for (const auto& c : r.witnesses)
        w.push_back(json{{"a", to_json(c.a_table)}, {"b", to_json(c.b_table)}, {"r", to_json(c.r)}});
    return json{{"verdict", to_string(r.verdict)},
                {"grid_resolution", r.grid_resolution},
                {"candidates_examined", r.candidates_examined},
                {"survivors", r.survivors},
                {"refined_solutions", r.refined_solutions},
                {"max_aligned_distance", r.max_aligned_distance},
                {"witnesses", w},
                {"note", r.note}};
}

json to_json(const TruthfulnessReport& r) {
    return json{{"is_equilibrium", r.is_equilibrium},   {"is_strict", r.is_strict},
                {"truthful_payoff", r.truthful_payoff}, {"worst_deviation", r.worst_deviation},
                {"margin", r.margin},                   {"grid_resolution", r.grid_resolution},
                {"grid_points", r.grid_points}};
}

json to_json(const FocalReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back(json{{"label", row.label},
                            {"class", to_string(row.classification)},
                            {"permutation", perm_json(row.permutation)},
                            {"payoff", row.payoff},
                            {"gap_to_truthful", row.gap_to_truthful}});
    return json{{"truthful_is_max", r.truthful_is_max},
                {"nonpermutation_strictly_below", r.nonpermutation_strictly_below},
                {"truthful_payoff", r.truthful_payoff},
                {"mutual_information", r.mutual_information},
                {"best_grid_payoff", r.best_grid_payoff},
                {"best_nonpermutation_payoff", r.best_nonpermutation_payoff},
                {"margin", r.margin},
                {"profiles_covered", static_cast<double>(r.profiles_covered)},
                {"grid_resolution", r.grid_resolution},
                {"rows", rows},
                {"note", r.note}};
}

TripletPrior prior_from_json(const json& doc) {
    reject_unknown_keys(doc, {"sigma_a", "sigma_b", "sigma_y", "prior_y", "cond_a", "cond_b"}, "prior");
    for (const char* key : {"sigma_a", "sigma_b", "sigma_y", "prior_y", "cond_a", "cond_b"})
        if (!doc.contains(key)) throw std::invalid_argument(std::string("prior: missing key '") + key + "'");
    const std::size_t sa = size_field(doc, "sigma_a");
    const std::size_t sb = size_field(doc, "sigma_b");
    const std::size_t sy = size_field(doc, "sigma_y");
    TripletPrior prior(Simplex(doc.at("prior_y").get<std::vector<double>>()), rows_from_json(doc.at("cond_a"), "cond_a"),
                       rows_from_json(doc.at("cond_b"), "cond_b"));
    if (prior.sigma_a() != sa || prior.sigma_b() != sb || prior.sigma_y() != sy)
        throw std::invalid_argument("prior: declared sizes do not match the tables");
    return prior;
}

OptimizerConfig optimizer_config_from_json(const json& doc) {
    reject_unknown_keys(doc,
                        {"restarts", "max_iters", "step_size", "tolerance", "seed", "optimize_p", "threads",
                         "record_curve"},
                        "optimizer");
    OptimizerConfig cfg;
    if (doc.contains("restarts")) cfg.restarts = doc["restarts"].get<std::size_t>();
    if (doc.contains("max_iters")) cfg.max_iters = doc["max_iters"].get<std::size_t>();
    if (doc.contains("step_size")) cfg.step_size = doc["step_size"].get<double>();
    if (doc.contains("tolerance")) cfg.tolerance = doc["tolerance"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("optimize_p")) cfg.optimize_p = doc["optimize_p"].get<bool>();
    if (doc.contains("threads")) cfg.threads = doc["threads"].get<std::size_t>();
    if (doc.contains("record_curve")) cfg.record_curve = doc["record_curve"].get<bool>();
    cfg.validate();
    return cfg;
}

Hypothesis hypothesis_from_json(const json& doc) { return Hypothesis(rows_from_json(doc, "hypothesis")); }

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("'" + path.string() + "': " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

TripletPrior read_prior_file(const std::filesystem::path& path) { return prior_from_json(read_json_file(path)); }

SampleSet read_samples_csv(std::istream& in) {
    SampleSet out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(trim(f));
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (!header_seen) {
            header_seen = true;
            if (fields != std::vector<std::string>{"task_id", "x_a", "x_b"})
                throw std::invalid_argument("samples: header must be task_id,x_a,x_b");
            continue;
        }
        if (fields.size() != 3)
            throw std::invalid_argument("samples line " + std::to_string(lineno) + ": expected 3 fields");
        TaskSample s;
        const auto [ptr, ec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), s.task_id);
        if (ec != std::errc() || ptr != fields[0].data() + fields[0].size())
            throw std::invalid_argument("samples line " + std::to_string(lineno) + ": bad task_id");
        s.x_a = parse_signal(fields[1], lineno);
        s.x_b = parse_signal(fields[2], lineno);
        out.push_back(s);
    }
    if (!header_seen) throw std::invalid_argument("samples: missing header");
    validate_samples(out);
    return out;
}

SampleSet read_samples_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_samples_csv(in);
}

void write_samples_csv(std::ostream& out, const SampleSet& samples, const std::string& provenance) {
    if (!provenance.empty()) out << provenance << '\n';
    out << "task_id,x_a,x_b\n";
    for (const auto& s : samples) {
        out << s.task_id << ',';
        if (s.x_a) out << *s.x_a;
        out << ',';
        if (s.x_b) out << *s.x_b;
        out << '\n';
    }
}

std::string provenance_line(const std::string& hash) { return "# fmig " + version() + " config " + hash; }

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace fmig
