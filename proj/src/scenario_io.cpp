#include "slicing/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "slicing/error.hpp"

namespace slicing {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ValidationError(where.empty() ? msg : where + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) fail(where.empty() ? key : where + "." + key, "unknown key");
}

const json& required(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing required key '") + key + "'");
    return *it;
}

std::string path(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

// Accepts a JSON number or a "p/q" fraction string.
double rate_value(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        double num = 0.0, den = 0.0;
        char slash = 0, extra = 0;
        if (std::sscanf(s.c_str(), "%lf %c %lf %c", &num, &slash, &den, &extra) == 3 && slash == '/' && den != 0.0)
            return num / den;
        if (std::sscanf(s.c_str(), "%lf %c", &num, &extra) == 1) return num;
    }
    fail(where, "expected a number or a 'p/q' fraction");
}

int int_value(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<int>();
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

bool boolean(const json& v, const std::string& where) {
    if (!v.is_boolean()) fail(where, "expected true or false");
    return v.get<bool>();
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

Policy parse_policy(const json& v, const std::string& where) {
    const auto s = text(v, where);
    if (s == "NC1") return Policy::nc1;
    if (s == "NC2") return Policy::nc2;
    if (s == "NC3") return Policy::nc3;
    fail(where, "policy must be NC1, NC2 or NC3");
}

Priority parse_priority(const json& v, const std::string& where) {
    const auto s = text(v, where);
    if (s == "high") return Priority::high;
    if (s == "low") return Priority::low;
    if (s == "none") return Priority::none;
    fail(where, "priority must be high, low or none");
}

InjectionMode parse_mode(const json& v, const std::string& where) {
    const auto s = text(v, where);
    if (s == "batch") return InjectionMode::batch;
    if (s == "poisson") return InjectionMode::poisson;
    if (s == "batch_plus_poisson") return InjectionMode::batch_plus_poisson;
    fail(where, "mode must be batch, poisson or batch_plus_poisson");
}

Warmup parse_warmup(const json& v, const std::string& where) {
    const auto s = text(v, where);
    if (s == "empty_start") return Warmup::empty_start;
    if (s == "stationary_video_start") return Warmup::stationary_video_start;
    fail(where, "warmup must be empty_start or stationary_video_start");
}

struct RawClass {
    TrafficClass cls;
    int demand_khz = 0;
    int downgraded_khz = 0;
};

RawClass parse_class(const json& c, const std::string& where) {
    reject_unknown(c, where, {"name", "arrival_rate", "service_rate", "demand_khz", "max_sessions", "priority",
                              "adaptive", "downgraded_demand_khz", "downgraded_service_rate", "numerology"});
    RawClass raw;
    auto& tc = raw.cls;
    tc.name = text(required(c, where, "name"), path(where, "name"));
    tc.arrival_rate = rate_value(required(c, where, "arrival_rate"), path(where, "arrival_rate"));
    tc.service_rate = rate_value(required(c, where, "service_rate"), path(where, "service_rate"));
    raw.demand_khz = int_value(required(c, where, "demand_khz"), path(where, "demand_khz"));
    tc.max_sessions = int_value(required(c, where, "max_sessions"), path(where, "max_sessions"));
    tc.priority = c.contains("priority") ? parse_priority(c["priority"], path(where, "priority")) : Priority::none;
    tc.adaptive = c.contains("adaptive") && boolean(c["adaptive"], path(where, "adaptive"));

    if (!(tc.arrival_rate >= 0.0)) fail(path(where, "arrival_rate"), "must be non-negative");
    if (!(tc.service_rate > 0.0)) fail(path(where, "service_rate"), "must be positive");
    if (raw.demand_khz <= 0) fail(path(where, "demand_khz"), "must be positive");
    if (tc.max_sessions < 0) fail(path(where, "max_sessions"), "must be non-negative");
    if (c.contains("numerology")) {
        const int beta = int_value(c["numerology"], path(where, "numerology"));
        if (beta < 0 || beta > max_beta) fail(path(where, "numerology"), "must be in 0..4");
    }

    if (tc.adaptive) {
        if (!c.contains("downgraded_demand_khz"))
            fail(where, "adaptive class needs 'downgraded_demand_khz'");
        raw.downgraded_khz = int_value(c["downgraded_demand_khz"], path(where, "downgraded_demand_khz"));
        if (raw.downgraded_khz <= 0) fail(path(where, "downgraded_demand_khz"), "must be positive");
        if (raw.downgraded_khz >= raw.demand_khz)
            fail(path(where, "downgraded_demand_khz"), "downgraded demand must be smaller than demand_khz");
        if (c.contains("downgraded_service_rate")) {
            tc.downgraded_service_rate =
                rate_value(c["downgraded_service_rate"], path(where, "downgraded_service_rate"));
            if (!(*tc.downgraded_service_rate > 0.0)) fail(path(where, "downgraded_service_rate"), "must be positive");
        }
    } else if (c.contains("downgraded_demand_khz") || c.contains("downgraded_service_rate")) {
        fail(where, "downgraded settings require \"adaptive\": true");
    }
    return raw;
}

InjectionSchedule parse_injection(const json& j, const std::string& where) {
    reject_unknown(j, where, {"mode", "t_inject_ms", "batch_size", "poisson_rate", "poisson_sessions", "retry_rejected"});
    InjectionSchedule inj;
    inj.mode = parse_mode(required(j, where, "mode"), path(where, "mode"));
    inj.t_inject_ms = number(required(j, where, "t_inject_ms"), path(where, "t_inject_ms"));
    if (j.contains("batch_size")) inj.batch_size = int_value(j["batch_size"], path(where, "batch_size"));
    if (j.contains("poisson_rate")) inj.poisson_rate = rate_value(j["poisson_rate"], path(where, "poisson_rate"));
    if (j.contains("poisson_sessions")) {
        if (!j["poisson_sessions"].is_number_integer()) fail(path(where, "poisson_sessions"), "expected an integer");
        inj.poisson_sessions = j["poisson_sessions"].get<long long>();
    }
    if (j.contains("retry_rejected")) inj.retry_rejected = boolean(j["retry_rejected"], path(where, "retry_rejected"));
    return inj;
}

std::pair<int, int> line_and_column(std::string_view text, std::size_t byte) {
    int line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace

Scenario parse_scenario(std::string_view source_text, std::string_view source) {
    json doc;
    try {
        doc = json::parse(source_text.begin(), source_text.end());
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_and_column(source_text, e.byte > 0 ? e.byte - 1 : 0);
        throw ValidationError(std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(col) +
                              ": parse error: " + e.what());
    }

    try {
        reject_unknown(doc, "", {"label", "description", "figure", "policy", "radio", "classes", "injection",
                                 "horizon_ms", "warmup", "initial_counts", "replications", "base_seed",
                                 "time_scale", "stop_at_priority_cap", "grid_ms"});
        Scenario sc;
        sc.label = text(required(doc, "", "label"), "label");
        if (doc.contains("description")) sc.description = text(doc["description"], "description");
        if (doc.contains("figure")) sc.figure = text(doc["figure"], "figure");
        sc.policy = parse_policy(required(doc, "", "policy"), "policy");

        const auto& classes = required(doc, "", "classes");
        if (!classes.is_array() || classes.empty()) fail("classes", "expected a non-empty array");
        std::vector<RawClass> raw;
        for (std::size_t i = 0; i < classes.size(); ++i)
            raw.push_back(parse_class(classes[i], "classes[" + std::to_string(i) + "]"));

        const auto& radio = required(doc, "", "radio");
        reject_unknown(radio, "radio", {"channel_bandwidth_khz", "numerology", "num_prbs", "block_khz",
                                        "guard_period_overhead_khz"});
        const int bandwidth = int_value(required(radio, "radio", "channel_bandwidth_khz"), "radio.channel_bandwidth_khz");
        const int beta = int_value(required(radio, "radio", "numerology"), "radio.numerology");
        const int prbs = int_value(required(radio, "radio", "num_prbs"), "radio.num_prbs");
        const int overhead = radio.contains("guard_period_overhead_khz")
                                 ? int_value(radio["guard_period_overhead_khz"], "radio.guard_period_overhead_khz")
                                 : 0;
        int block = 0;
        for (const auto& r : raw) {
            block = std::gcd(block, r.demand_khz);
            if (r.downgraded_khz) block = std::gcd(block, r.downgraded_khz);
        }
        if (radio.contains("block_khz")) {
            const int given = int_value(radio["block_khz"], "radio.block_khz");
            if (given <= 0 || block % given != 0) fail("radio.block_khz", "must divide every class demand");
            block = given;
        }
        try {
            sc.radio = usable_capacity(bandwidth, lookup_numerology(beta), prbs, block, overhead);
        } catch (const Error& e) {
            fail("radio", e.what());
        }

        for (auto& r : raw) {
            r.cls.demand_blocks = r.demand_khz / block;
            if (r.downgraded_khz) r.cls.downgraded_demand_blocks = r.downgraded_khz / block;
            sc.classes.push_back(std::move(r.cls));
        }

        if (doc.contains("injection") && !doc["injection"].is_null())
            sc.injection = parse_injection(doc["injection"], "injection");
        sc.horizon_ms = number(required(doc, "", "horizon_ms"), "horizon_ms");
        if (doc.contains("warmup")) sc.warmup = parse_warmup(doc["warmup"], "warmup");
        if (doc.contains("initial_counts")) {
            const auto& ic = doc["initial_counts"];
            if (!ic.is_array()) fail("initial_counts", "expected an array of integers");
            std::vector<int> counts;
            for (std::size_t i = 0; i < ic.size(); ++i)
                counts.push_back(int_value(ic[i], "initial_counts[" + std::to_string(i) + "]"));
            sc.initial_counts = std::move(counts);
        }
        sc.replications = int_value(required(doc, "", "replications"), "replications");
        const auto& seed = required(doc, "", "base_seed");
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
            fail("base_seed", "expected a non-negative integer");
        sc.base_seed = seed.get<std::uint64_t>();
        if (doc.contains("time_scale")) sc.time_scale = rate_value(doc["time_scale"], "time_scale");
        if (doc.contains("stop_at_priority_cap"))
            sc.stop_at_priority_cap = boolean(doc["stop_at_priority_cap"], "stop_at_priority_cap");
        if (doc.contains("grid_ms")) sc.grid_ms = number(doc["grid_ms"], "grid_ms");

        sc.validate();
        return sc;
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(source) + ": " + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ValidationError(file.string() + ": cannot open scenario file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), file.string());
}

nlohmann::ordered_json scenario_to_json(const Scenario& sc) {
    nlohmann::ordered_json j;
    j["label"] = sc.label;
    j["policy"] = std::string(to_string(sc.policy));
    j["radio"] = {{"channel_bandwidth_khz", sc.radio.channel_bandwidth_khz},
                  {"block_khz", sc.radio.block_khz},
                  {"usable_capacity_khz", sc.radio.usable_capacity_khz},
                  {"capacity_blocks", sc.radio.capacity_blocks},
                  {"guard_band_khz", sc.radio.guard_band_khz},
                  {"guard_period_overhead_khz", sc.radio.guard_period_overhead_khz}};
    auto classes = nlohmann::ordered_json::array();
    for (const auto& c : sc.classes) {
        nlohmann::ordered_json cj;
        cj["name"] = c.name;
        cj["arrival_rate"] = c.arrival_rate;
        cj["service_rate"] = c.service_rate;
        cj["demand_blocks"] = c.demand_blocks;
        cj["max_sessions"] = c.max_sessions;
        cj["priority"] = std::string(to_string(c.priority));
        cj["adaptive"] = c.adaptive;
        if (c.adaptive) {
            cj["downgraded_demand_blocks"] = c.downgraded_demand_blocks;
            cj["downgraded_service_rate"] = c.downgraded_service_rate.value_or(c.service_rate);
        }
        classes.push_back(std::move(cj));
    }
    j["classes"] = std::move(classes);
    if (sc.injection) {
        const auto& inj = *sc.injection;
        nlohmann::ordered_json ij;
        ij["mode"] = std::string(to_string(inj.mode));
        ij["t_inject_ms"] = inj.t_inject_ms;
        ij["batch_size"] = inj.batch_size;
        ij["poisson_rate"] = inj.poisson_rate;
        if (inj.poisson_sessions) ij["poisson_sessions"] = *inj.poisson_sessions;
        else ij["poisson_sessions"] = nullptr;
        ij["retry_rejected"] = inj.retry_rejected;
        j["injection"] = std::move(ij);
    } else {
        j["injection"] = nullptr;
    }
    j["horizon_ms"] = sc.horizon_ms;
    j["warmup"] = std::string(to_string(sc.warmup));
    if (sc.initial_counts) j["initial_counts"] = *sc.initial_counts;
    j["replications"] = sc.replications;
    j["base_seed"] = sc.base_seed;
    j["time_scale"] = sc.time_scale;
    j["stop_at_priority_cap"] = sc.stop_at_priority_cap;
    j["grid_ms"] = sc.grid_ms;
    return j;
}

std::string scenario_hash(const Scenario& scenario) {
    const auto canonical = scenario_to_json(scenario).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace slicing
