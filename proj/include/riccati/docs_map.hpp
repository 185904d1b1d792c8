#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace riccati {

struct MapIssue {
    /// Entry id, or the operation name for unmapped operations.
    std::string entry;
    std::string message;
};

struct MapReport {
    bool pass = true;
    std::size_t entries = 0;
    std::vector<MapIssue> issues;

    nlohmann::json to_json() const;
};

/// Exported operations found in the headers of `include_dir`: free functions
/// declared at namespace scope (column 0), plus "Type::member" for every
/// member function of a public class or struct.
std::vector<std::string> declared_operations(const std::filesystem::path& include_dir);

/// Checks the map against the declared operations:
///  - every entry has an id, an anchor and a status in {implemented, out-of-scope};
///  - ids are unique and no implemented entry lists an operation twice;
///  - every named operation exists (no dangling references);
///  - every declared free function appears in some entry or in "plumbing",
///    and never in both.
MapReport validate_map(const nlohmann::json& map, const std::vector<std::string>& operations);

/// Reads a JSON document; throws ParseError.
nlohmann::json load_json_file(const std::filesystem::path& path);

}  // namespace riccati
