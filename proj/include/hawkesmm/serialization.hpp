#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkesmm/hawkes.hpp"
#include "hawkesmm/hjb.hpp"
#include "hawkesmm/kernels.hpp"

namespace hawkesmm {

using Json = nlohmann::json;

/// {"type": "expsum", "weights": [...], "rates": [...]} or
/// {"type": "powerlaw", "lam": .., "alpha": .., "beta": .., "eps": ..}
Json kernel_to_json(const Kernel& k);
Kernel kernel_from_json(const Json& j);
ExpSumKernel expsum_from_json(const Json& j);

Json state_to_json(const MarketState& s);
MarketState state_from_json(const Json& j, std::size_t n);

Json grid_to_json(const hjb::GridSpec& g);
/// `kernel` is used when the object has no "kernel" entry.
hjb::GridSpec grid_from_json(const Json& j, const ExpSumKernel* kernel = nullptr);

/// Reads a whole file; IoError when it cannot be opened.
std::string read_text(const std::filesystem::path& p);
/// Writes with LF line endings; IoError on failure.
void write_text(const std::filesystem::path& p, const std::string& content);
Json read_json(const std::filesystem::path& p);

/// Throws ConfigError naming `where` if j has keys outside `allowed`.
void reject_unknown_keys(const Json& j, const std::vector<std::string>& allowed, const std::string& where);

}  // namespace hawkesmm
