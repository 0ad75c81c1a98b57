#include "ctxfix/context_index.hpp"

#include <fstream>
#include <sstream>

namespace ctxfix {

namespace {

using json = nlohmann::ordered_json;

std::string_view param_kind_name(py::ParamKind kind) {
    switch (kind) {
    case py::ParamKind::Positional: return "positional";
    case py::ParamKind::VarPositional: return "var_positional";
    case py::ParamKind::KeywordOnly: return "keyword_only";
    case py::ParamKind::VarKeyword: return "var_keyword";
    }
    return "positional";
}

py::ParamKind param_kind_from(std::string_view s) {
    if (s == "positional") return py::ParamKind::Positional;
    if (s == "var_positional") return py::ParamKind::VarPositional;
    if (s == "keyword_only") return py::ParamKind::KeywordOnly;
    if (s == "var_keyword") return py::ParamKind::VarKeyword;
    throw DatabaseFormatError("unknown parameter kind '" + std::string(s) + "'");
}

template <std::size_t N>
json rows_to_json(const std::vector<std::array<EntryId, N>>& rows) {
    json out = json::array();
    for (const auto& r : rows) {
        json row = json::array();
        for (EntryId id : r) {
            row.push_back(id);
        }
        out.push_back(std::move(row));
    }
    return out;
}

template <std::size_t N>
std::vector<std::array<EntryId, N>> rows_from_json(const json& j, const char* name) {
    std::vector<std::array<EntryId, N>> rows;
    for (const auto& r : j) {
        if (!r.is_array() || r.size() != N) {
            throw DatabaseFormatError(std::string("malformed row in table ") + name);
        }
        std::array<EntryId, N> row{};
        for (std::size_t i = 0; i < N; ++i) {
            row[i] = r[i].get<EntryId>();
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace

json to_json(const ContextEntry& e) {
    json j;
    j["id"] = e.id;
    j["kind"] = std::string(to_string(e.kind));
    j["name"] = e.name;
    j["qualified_name"] = e.qualified_name;
    j["path"] = e.path;
    j["span"] = json::array({e.span.start, e.span.end});
    j["parent_id"] = e.parent_id ? json(*e.parent_id) : json(nullptr);
    j["docstring"] = e.docstring ? json(*e.docstring) : json(nullptr);
    if (e.signature) {
        json params = json::array();
        for (const auto& p : e.signature->params) {
            json pj;
            pj["name"] = p.name;
            pj["kind"] = std::string(param_kind_name(p.kind));
            pj["default"] = p.has_default;
            params.push_back(std::move(pj));
        }
        json sig;
        sig["params"] = std::move(params);
        sig["defaulted"] = e.signature->defaulted_count();
        j["signature"] = std::move(sig);
    } else {
        j["signature"] = nullptr;
    }
    json props = json::object();
    for (const auto& [k, v] : e.properties) {
        props[k] = v;
    }
    j["properties"] = std::move(props);
    return j;
}

ContextEntry entry_from_json(const json& j) {
    ContextEntry e;
    try {
        e.id = j.at("id").get<EntryId>();
        auto kind = entry_kind_from_string(j.at("kind").get<std::string>());
        if (!kind) {
            throw DatabaseFormatError("unknown entry kind '" + j.at("kind").get<std::string>() + "'");
        }
        e.kind = *kind;
        e.name = j.at("name").get<std::string>();
        e.qualified_name = j.at("qualified_name").get<std::string>();
        e.path = j.at("path").get<std::string>();
        const auto& span = j.at("span");
        e.span = {span.at(0).get<int>(), span.at(1).get<int>()};
        if (!j.at("parent_id").is_null()) {
            e.parent_id = j["parent_id"].get<EntryId>();
        }
        if (!j.at("docstring").is_null()) {
            e.docstring = j["docstring"].get<std::string>();
        }
        if (!j.at("signature").is_null()) {
            Signature sig;
            for (const auto& pj : j["signature"].at("params")) {
                sig.params.push_back({pj.at("name").get<std::string>(),
                                      param_kind_from(pj.at("kind").get<std::string>()),
                                      pj.at("default").get<bool>()});
            }
            e.signature = std::move(sig);
        }
        for (const auto& [k, v] : j.at("properties").items()) {
            e.properties[k] = v.get<std::string>();
        }
    } catch (const nlohmann::json::exception& ex) {
        throw DatabaseFormatError(std::string("malformed entry: ") + ex.what());
    }
    return e;
}

json to_json(const StructuralTables& t) {
    json j;
    j["M"] = rows_to_json(t.modules);
    j["M_C"] = rows_to_json(t.module_classes);
    j["M_C_CF"] = rows_to_json(t.class_functions);
    j["M_C_V"] = rows_to_json(t.class_variables);
    j["M_GF"] = rows_to_json(t.global_functions);
    j["M_GV"] = rows_to_json(t.global_variables);
    return j;
}

json to_json(const ProjectDatabase& db) {
    json j;
    j["format_version"] = db.format_version();
    j["project_root"] = db.project_root();
    j["embedder"] = db.encoder_description();
    json entries = json::array();
    for (const auto& e : db.entries()) {
        entries.push_back(to_json(e));
    }
    j["entries"] = std::move(entries);
    j["tables"] = to_json(db.tables());
    json embeddings = json::array();
    for (const auto& v : db.embeddings()) {
        if (!v) {
            embeddings.push_back(nullptr);
            continue;
        }
        json arr = json::array();
        for (float f : v->values) {
            arr.push_back(f);
        }
        embeddings.push_back(std::move(arr));
    }
    j["embeddings"] = std::move(embeddings);
    json warnings = json::array();
    for (const auto& w : db.warnings()) {
        warnings.push_back(json{{"path", w.path}, {"message", w.message}});
    }
    j["warnings"] = std::move(warnings);
    return j;
}

ProjectDatabase database_from_json(const json& j) {
    try {
        int version = j.at("format_version").get<int>();
        if (version != ProjectDatabase::kFormatVersion) {
            throw DatabaseFormatError("unsupported database format_version " + std::to_string(version));
        }
        std::vector<ContextEntry> entries;
        for (const auto& ej : j.at("entries")) {
            entries.push_back(entry_from_json(ej));
        }
        std::vector<std::optional<EmbeddingVector>> embeddings;
        for (const auto& vj : j.at("embeddings")) {
            if (vj.is_null()) {
                embeddings.emplace_back();
                continue;
            }
            EmbeddingVector v;
            v.values.reserve(vj.size());
            for (const auto& x : vj) {
                v.values.push_back(x.get<float>());
            }
            embeddings.emplace_back(std::move(v));
        }
        std::vector<IndexWarning> warnings;
        if (j.contains("warnings")) {
            for (const auto& w : j["warnings"]) {
                warnings.push_back({w.at("path").get<std::string>(), w.at("message").get<std::string>()});
            }
        }
        ProjectDatabase db(j.at("project_root").get<std::string>(), std::move(entries),
                           j.at("embedder"), std::move(embeddings), std::move(warnings));
        const auto& tj = j.at("tables");
        StructuralTables stored;
        stored.modules = rows_from_json<1>(tj.at("M"), "M");
        stored.module_classes = rows_from_json<2>(tj.at("M_C"), "M_C");
        stored.class_functions = rows_from_json<3>(tj.at("M_C_CF"), "M_C_CF");
        stored.class_variables = rows_from_json<3>(tj.at("M_C_V"), "M_C_V");
        stored.global_functions = rows_from_json<2>(tj.at("M_GF"), "M_GF");
        stored.global_variables = rows_from_json<2>(tj.at("M_GV"), "M_GV");
        if (!(stored == db.tables())) {
            throw DatabaseFormatError("stored structural tables are inconsistent with the entries");
        }
        return db;
    } catch (const nlohmann::json::exception& ex) {
        throw DatabaseFormatError(std::string("malformed database: ") + ex.what());
    } catch (const ContractViolation& ex) {
        throw DatabaseFormatError(std::string("invalid embedding data: ") + ex.what());
    }
}

std::string serialize_database(const ProjectDatabase& db) { return to_json(db).dump() + "\n"; }

ProjectDatabase deserialize_database(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::parse_error& ex) {
        throw DatabaseFormatError(std::string("database is not valid JSON: ") + ex.what());
    }
    return database_from_json(j);
}

void save_database(const ProjectDatabase& db, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write database to '" + path.string() + "'");
    }
    out << serialize_database(db);
    if (!out) {
        throw IoError("write failed for '" + path.string() + "'");
    }
}

ProjectDatabase load_database(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read database '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_database(buf.str());
}

} // namespace ctxfix
