#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mixsob/error.hpp"

namespace mixsob {

enum class Subcommand { eigen, sobolev_scan, bn_linear, bn_superlinear, competitor_scan, reproduce_all };

std::string to_string(Subcommand c);
std::optional<Subcommand> parse_subcommand(std::string_view name);
const std::vector<Subcommand>& all_subcommands();

/// Raised for anything wrong with a configuration: syntax, unknown keys,
/// wrong types, out-of-range values.
class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// One validated parameter block. `params` holds every key of the
/// subcommand's schema, defaults filled in, so equal configs serialize to
/// equal bytes.
struct ExperimentConfig {
    Subcommand subcommand = Subcommand::eigen;
    nlohmann::json params;

    std::uint64_t seed() const;
    /// FNV-1a of the subcommand name and the canonical parameter dump, as 16 hex digits.
    std::string hash() const;

    double number(const std::string& key) const;
    int integer(const std::string& key) const;
    std::string text(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    std::vector<int> integers(const std::string& key) const;
};

/// TOML, or JSON when the extension is .json. Either way the document must
/// hold exactly one top-level table, named after the subcommand.
nlohmann::json read_config_document(const std::filesystem::path& path);

/// Validates before anything is computed. `seed_override` replaces the
/// block's seed (and so enters the hash).
ExperimentConfig parse_config(Subcommand cmd, const nlohmann::json& document,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(Subcommand cmd, const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

/// The schema defaults alone.
ExperimentConfig default_config(Subcommand cmd);

}  // namespace mixsob
