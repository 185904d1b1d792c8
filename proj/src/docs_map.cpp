#include "riccati/docs_map.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "riccati/error.hpp"

namespace riccati {

using nlohmann::json;

json MapReport::to_json() const
{
    json is = json::array();
    for (const auto& i : issues) is.push_back({{"entry", i.entry}, {"message", i.message}});
    return {{"pass", pass}, {"entries", entries}, {"issues", is}};
}

std::vector<std::string> declared_operations(const std::filesystem::path& include_dir)
{
    static const std::regex free_fn(
        R"(^(?:inline\s+|constexpr\s+|const\s+)*[A-Za-z_][\w:]*(?:<[^()]*>)?(?:\s*[\*&])?\s+([A-Za-z_]\w*)\()");
    static const std::regex type_open(R"(^(?:class|struct)\s+([A-Z]\w*)\b[^;]*$)");
    static const std::regex member_fn(
        R"(^\s{4}(?:static\s+|virtual\s+|explicit\s+|const\s+)*(?:[A-Za-z_][\w:]*(?:<[^()]*>)?(?:\s*[\*&])?\s+)?([A-Za-z_]\w*)\()");
    static const std::set<std::string> keywords = {"return", "if", "for", "while", "switch", "operator", "sizeof"};
    std::set<std::string> out;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(include_dir)) {
        if (e.path().extension() == ".hpp") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f);
        std::string line;
        std::string current_type;
        while (std::getline(in, line)) {
            std::smatch m;
            if (line.rfind("//", 0) == 0 || line.rfind("#", 0) == 0) continue;
            if (std::regex_search(line, m, type_open)) {
                current_type = m[1];
                continue;
            }
            if (line.rfind("};", 0) == 0) {
                current_type.clear();
                continue;
            }
            if (!current_type.empty()) {
                if (std::regex_search(line, m, member_fn) && !keywords.count(m[1]) && m[1] != current_type) {
                    out.insert(current_type + "::" + std::string(m[1]));
                }
                continue;
            }
            if (std::regex_search(line, m, free_fn) && !keywords.count(m[1])) out.insert(m[1]);
        }
    }
    return {out.begin(), out.end()};
}

MapReport validate_map(const json& map, const std::vector<std::string>& operations)
{
    MapReport rep;
    auto issue = [&](const std::string& id, const std::string& msg) { rep.issues.push_back({id, msg}); };
    const std::set<std::string> known(operations.begin(), operations.end());
    std::map<std::string, int> used;
    std::set<std::string> ids;
    if (!map.contains("entries") || !map.at("entries").is_array()) {
        issue("", "map has no entries array");
        rep.pass = false;
        return rep;
    }
    for (const auto& e : map.at("entries")) {
        ++rep.entries;
        const std::string id = e.value("id", std::string());
        if (id.empty()) {
            issue("", "entry without id");
            continue;
        }
        if (!ids.insert(id).second) issue(id, "duplicate entry");
        if (!e.contains("anchor") || e.at("anchor").get<std::string>().empty()) issue(id, "entry without anchor");
        const std::string status = e.value("status", std::string());
        if (status != "implemented" && status != "out-of-scope") {
            issue(id, "status must be implemented or out-of-scope");
            continue;
        }
        const json ops = e.value("operations", json::array());
        if (status == "implemented" && ops.empty()) issue(id, "implemented entry names no operation");
        std::set<std::string> seen;
        for (const auto& o : ops) {
            const std::string op = o.get<std::string>();
            if (!seen.insert(op).second) issue(id, "operation '" + op + "' listed twice");
            if (!known.count(op)) issue(id, "dangling operation '" + op + "'");
            ++used[op];
        }
    }
    std::set<std::string> plumbing;
    for (const auto& o : map.value("plumbing", json::array())) {
        const std::string op = o.get<std::string>();
        if (!plumbing.insert(op).second) issue(op, "duplicate plumbing entry");
        if (!known.count(op)) issue(op, "dangling plumbing entry");
        if (used.count(op)) issue(op, "operation is both mapped and plumbing");
    }
    for (const auto& op : operations) {
        if (op.find("::") != std::string::npos) continue;
        if (!used.count(op) && !plumbing.count(op)) issue(op, "operation missing from the map");
    }
    rep.pass = rep.issues.empty();
    return rep;
}

json load_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorKind::ParseError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
}

}  // namespace riccati
