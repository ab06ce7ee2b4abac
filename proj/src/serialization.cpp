#include "hawkesmm/serialization.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace hawkesmm {
namespace {

template <class T>
T required(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + ": key '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

template <class T>
std::vector<T> broadcast(const Json& j, std::size_t n, const std::string& where) {
    if (j.is_array()) {
        auto v = j.get<std::vector<T>>();
        if (v.size() != n) throw ConfigError(where + ": expected " + std::to_string(n) + " entries");
        return v;
    }
    return std::vector<T>(n, j.get<T>());
}

}  // namespace

void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

Json kernel_to_json(const Kernel& k) {
    if (const auto* e = std::get_if<ExpSumKernel>(&k)) {
        return Json{{"type", "expsum"}, {"weights", e->weights()}, {"rates", e->rates()}};
    }
    const auto& p = std::get<PowerLawKernel>(k);
    return Json{{"type", "powerlaw"}, {"lam", p.lam()}, {"alpha", p.alpha()}, {"beta", p.beta()}, {"eps", p.eps()}};
}

ExpSumKernel expsum_from_json(const Json& j) {
    const auto kernel = kernel_from_json(j);
    if (!std::holds_alternative<ExpSumKernel>(kernel)) {
        throw ConfigError("kernel: an exp-sum kernel is required here");
    }
    return std::get<ExpSumKernel>(kernel);
}

Kernel kernel_from_json(const Json& j) {
    const auto type = required<std::string>(j, "type", "kernel");
    try {
        if (type == "expsum") {
            reject_unknown_keys(j, {"type", "weights", "rates"}, "kernel");
            return ExpSumKernel(required<std::vector<double>>(j, "weights", "kernel"),
                                required<std::vector<double>>(j, "rates", "kernel"));
        }
        if (type == "powerlaw") {
            reject_unknown_keys(j, {"type", "lam", "alpha", "beta", "eps"}, "kernel");
            return PowerLawKernel(required<double>(j, "lam", "kernel"), required<double>(j, "alpha", "kernel"),
                                  required<double>(j, "beta", "kernel"), required<double>(j, "eps", "kernel"));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("kernel: unknown type '" + type + "'");
}

Json state_to_json(const MarketState& s) {
    return Json{{"inventory", s.inventory}, {"c_ask", s.c_ask}, {"c_bid", s.c_bid}, {"clock", s.clock}};
}

MarketState state_from_json(const Json& j, std::size_t n) {
    reject_unknown_keys(j, {"inventory", "c_ask", "c_bid", "clock"}, "state");
    MarketState s = MarketState::zero(n, j.value("inventory", 0));
    if (j.contains("c_ask")) s.c_ask = j["c_ask"].get<std::vector<double>>();
    if (j.contains("c_bid")) s.c_bid = j["c_bid"].get<std::vector<double>>();
    s.clock = j.value("clock", 0.0);
    if (s.c_ask.size() != n || s.c_bid.size() != n) {
        throw ConfigError("state: c_ask and c_bid need " + std::to_string(n) + " entries");
    }
    for (double x : s.c_ask) {
        if (x < 0.0) throw ConfigError("state: c_ask must be >= 0");
    }
    for (double x : s.c_bid) {
        if (x < 0.0) throw ConfigError("state: c_bid must be >= 0");
    }
    return s;
}

Json grid_to_json(const hjb::GridSpec& g) {
    return Json{{"i_min", g.i_min},
                {"i_max", g.i_max},
                {"c_max", g.c_max},
                {"m_c", g.m_c},
                {"dt", g.dt},
                {"T", g.T},
                {"r", g.r},
                {"mu_penalty", g.mu_penalty},
                {"k_over_sigma", g.k_over_sigma},
                {"mu_base", g.mu_base},
                {"kernel", kernel_to_json(g.kernel)},
                {"snapshot_stride", g.snapshot_stride}};
}

hjb::GridSpec grid_from_json(const Json& j, const ExpSumKernel* kernel) {
    reject_unknown_keys(j,
                        {"i_min", "i_max", "c_max", "m_c", "dt", "T", "r", "mu_penalty", "k_over_sigma",
                         "mu_base", "kernel", "snapshot_stride"},
                        "grid");
    hjb::GridSpec g;
    try {
        if (j.contains("kernel")) {
            g.kernel = expsum_from_json(j["kernel"]);
        } else if (kernel != nullptr) {
            g.kernel = *kernel;
        } else {
            throw ConfigError("grid: no kernel given");
        }
        const std::size_t n = g.kernel.size();
        g.i_min = j.value("i_min", g.i_min);
        g.i_max = j.value("i_max", g.i_max);
        if (j.contains("c_max")) g.c_max = broadcast<double>(j["c_max"], n, "grid.c_max");
        if (j.contains("m_c")) g.m_c = broadcast<std::size_t>(j["m_c"], n, "grid.m_c");
        if (n > 0 && (g.c_max.empty() || g.m_c.empty())) throw ConfigError("grid: c_max and m_c are required");
        g.dt = j.value("dt", g.dt);
        g.T = j.value("T", g.T);
        g.r = j.value("r", g.r);
        g.mu_penalty = j.value("mu_penalty", g.mu_penalty);
        g.k_over_sigma = j.value("k_over_sigma", g.k_over_sigma);
        g.mu_base = j.value("mu_base", g.mu_base);
        g.snapshot_stride = j.value("snapshot_stride", g.snapshot_stride);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    return g;
}

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open '" + p.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& content) {
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + p.string() + "' for writing");
    out << content;
    if (!out) throw IoError("failed writing '" + p.string() + "'");
}

Json read_json(const std::filesystem::path& p) {
    const std::string text = read_text(p);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

}  // namespace hawkesmm
