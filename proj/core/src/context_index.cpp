#include "ctxfix/context_index.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <variant>

namespace ctxfix {

namespace fs = std::filesystem;

std::string_view to_string(EntryKind kind) {
    switch (kind) {
    case EntryKind::Module: return "Module";
    case EntryKind::Class: return "Class";
    case EntryKind::Function: return "Function";
    case EntryKind::Variable: return "Variable";
    }
    return "Module";
}

std::optional<EntryKind> entry_kind_from_string(std::string_view text) {
    if (text == "Module") return EntryKind::Module;
    if (text == "Class") return EntryKind::Class;
    if (text == "Function") return EntryKind::Function;
    if (text == "Variable") return EntryKind::Variable;
    return std::nullopt;
}

std::size_t Signature::defaulted_count() const {
    return static_cast<std::size_t>(
        std::count_if(params.begin(), params.end(), [](const py::Parameter& p) { return p.has_default; }));
}

bool StructuralTables::empty() const noexcept {
    return modules.empty() && module_classes.empty() && class_functions.empty() &&
           class_variables.empty() && global_functions.empty() && global_variables.empty();
}

// ---------------------------------------------------------------------------
// Scanning

ScanResult scan_source_files(const fs::path& root, const std::vector<std::string>& extensions) {
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IoError("cannot read project root '" + root.string() + "'");
    }
    ScanResult result;
    std::vector<fs::path> files;
    auto it = fs::recursive_directory_iterator(root, fs::directory_options::none, ec);
    if (ec) {
        throw IoError("cannot read project root '" + root.string() + "': " + ec.message());
    }
    for (auto end = fs::recursive_directory_iterator(); it != end; it.increment(ec)) {
        if (ec) {
            result.warnings.push_back({it->path().lexically_relative(root).generic_string(), ec.message()});
            ec.clear();
            continue;
        }
        const auto& entry = *it;
        std::error_code sec;
        if (entry.is_symlink(sec) && entry.is_directory(sec)) {
            it.disable_recursion_pending();
            continue;
        }
        if (!entry.is_regular_file(sec)) {
            continue;
        }
        std::string ext = entry.path().extension().string();
        if (std::find(extensions.begin(), extensions.end(), ext) == extensions.end()) {
            continue;
        }
        files.push_back(entry.path());
    }
    std::vector<std::pair<std::string, fs::path>> ordered;
    ordered.reserve(files.size());
    for (auto& f : files) {
        ordered.emplace_back(f.lexically_relative(root).generic_string(), f);
    }
    std::sort(ordered.begin(), ordered.end());
    for (auto& [rel, path] : ordered) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            result.warnings.push_back({rel, "unreadable file skipped"});
            continue;
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        if (in.bad()) {
            result.warnings.push_back({rel, "read error; file skipped"});
            continue;
        }
        result.units.push_back({rel, buf.str(), "python"});
    }
    return result;
}

std::string module_name_for_path(std::string_view relative_path) {
    std::string p(relative_path);
    auto slash = p.find_last_of('/');
    auto dot = p.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        p.erase(dot);
    }
    std::replace(p.begin(), p.end(), '/', '.');
    std::replace(p.begin(), p.end(), '\\', '.');
    return p;
}

// ---------------------------------------------------------------------------
// Extraction (explicit-stack traversal with a prefix sequence)

namespace {

struct PrefixMark {};

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) {
            out += sep;
        }
        out += items[i];
    }
    return out;
}

std::optional<EntryKind> indexed_kind(py::NodeKind kind) {
    switch (kind) {
    case py::NodeKind::Module: return EntryKind::Module;
    case py::NodeKind::Class: return EntryKind::Class;
    case py::NodeKind::Function: return EntryKind::Function;
    case py::NodeKind::Variable: return EntryKind::Variable;
    case py::NodeKind::Block: return std::nullopt;
    }
    return std::nullopt;
}

std::map<std::string, std::string> node_properties(const py::OutlineNode& node) {
    std::map<std::string, std::string> props;
    if (!node.decorators.empty()) {
        props["decorators"] = join(node.decorators, ", ");
    }
    if (!node.bases.empty()) {
        props["bases"] = join(node.bases, ", ");
    }
    if (!node.value.empty()) {
        props["value"] = node.value.size() > 200 ? node.value.substr(0, 200) + "..." : node.value;
    }
    if (!node.annotation.empty()) {
        props["annotation"] = node.annotation;
    }
    if (node.is_async) {
        props["async"] = "true";
    }
    if (!node.instance_attributes.empty()) {
        props["instance_attributes"] = join(node.instance_attributes, ", ");
    }
    if (!node.imported_names.empty()) {
        props["imports"] = join(node.imported_names, ", ");
    }
    if (node.has_star_import) {
        props["star_import"] = "true";
    }
    return props;
}

} // namespace

std::vector<ContextEntry> extract_entries(const SourceUnit& unit, EntryId first_id) {
    const py::OutlineNode root = py::parse_outline(unit.text);
    const std::string module_name = module_name_for_path(unit.path);

    std::vector<ContextEntry> entries;
    std::vector<EntryId> prefix;  // ids of the enclosing indexed nodes
    std::vector<std::variant<const py::OutlineNode*, PrefixMark>> to_visit;
    to_visit.emplace_back(&root);

    while (!to_visit.empty()) {
        auto current = to_visit.back();
        to_visit.pop_back();
        if (std::holds_alternative<PrefixMark>(current)) {
            prefix.pop_back();
            continue;
        }
        const py::OutlineNode& node = *std::get<const py::OutlineNode*>(current);
        if (auto kind = indexed_kind(node.kind)) {
            ContextEntry e;
            e.id = first_id + entries.size();
            e.kind = *kind;
            e.path = unit.path;
            e.span = {node.start_line, node.end_line};
            e.docstring = node.docstring;
            e.properties = node_properties(node);
            if (*kind == EntryKind::Module) {
                e.name = module_name;
                e.qualified_name = module_name;
            } else {
                const ContextEntry& parent = entries.at(prefix.back() - first_id);
                e.name = node.name;
                e.qualified_name = parent.qualified_name + "." + node.name;
                e.parent_id = parent.id;
            }
            if (*kind == EntryKind::Function) {
                e.signature = Signature{node.params};
            }
            prefix.push_back(e.id);
            entries.push_back(std::move(e));
            to_visit.emplace_back(PrefixMark{});
        }
        for (auto it = node.children.rbegin(); it != node.children.rend(); ++it) {
            to_visit.emplace_back(&*it);
        }
    }
    return entries;
}

// ---------------------------------------------------------------------------
// Tables

StructuralTables derive_tables(const std::vector<ContextEntry>& entries) {
    StructuralTables t;
    auto kind_of = [&](EntryId id) { return entries.at(id).kind; };
    // Module of a class reached through class-only ancestors, if any.
    auto class_module = [&](EntryId cls) -> std::optional<EntryId> {
        std::optional<EntryId> cur = entries.at(cls).parent_id;
        while (cur) {
            EntryKind k = kind_of(*cur);
            if (k == EntryKind::Module) {
                return cur;
            }
            if (k != EntryKind::Class) {
                return std::nullopt;
            }
            cur = entries.at(*cur).parent_id;
        }
        return std::nullopt;
    };
    for (const auto& e : entries) {
        switch (e.kind) {
        case EntryKind::Module:
            t.modules.push_back({e.id});
            break;
        case EntryKind::Class:
            if (e.parent_id && kind_of(*e.parent_id) == EntryKind::Module) {
                t.module_classes.push_back({*e.parent_id, e.id});
            }
            break;
        case EntryKind::Function:
        case EntryKind::Variable: {
            if (!e.parent_id) {
                break;
            }
            EntryId parent = *e.parent_id;
            EntryKind pk = kind_of(parent);
            bool fn = e.kind == EntryKind::Function;
            if (pk == EntryKind::Module) {
                (fn ? t.global_functions : t.global_variables).push_back({parent, e.id});
            } else if (pk == EntryKind::Class) {
                if (auto m = class_module(parent)) {
                    (fn ? t.class_functions : t.class_variables).push_back({*m, parent, e.id});
                }
            }
            break;
        }
        }
    }
    std::sort(t.modules.begin(), t.modules.end());
    std::sort(t.module_classes.begin(), t.module_classes.end());
    std::sort(t.class_functions.begin(), t.class_functions.end());
    std::sort(t.class_variables.begin(), t.class_variables.end());
    std::sort(t.global_functions.begin(), t.global_functions.end());
    std::sort(t.global_variables.begin(), t.global_variables.end());
    return t;
}

// ---------------------------------------------------------------------------
// Passages

std::string render_signature(const Signature& signature) {
    std::string out = "(";
    for (std::size_t i = 0; i < signature.params.size(); ++i) {
        const auto& p = signature.params[i];
        if (i) {
            out += ", ";
        }
        if (p.kind == py::ParamKind::VarPositional) {
            out += "*";
        } else if (p.kind == py::ParamKind::VarKeyword) {
            out += "**";
        }
        out += p.name;
        if (p.has_default) {
            out += "=...";
        }
    }
    out += ")";
    return out;
}

std::string entry_schema_text(const ContextEntry& entry) {
    std::string text(to_string(entry.kind));
    text += " ";
    text += entry.qualified_name;
    if (entry.signature) {
        text += render_signature(*entry.signature);
    }
    if (entry.docstring && !entry.docstring->empty()) {
        text += "\n";
        text += *entry.docstring;
    }
    return text;
}

// ---------------------------------------------------------------------------
// ProjectDatabase

ProjectDatabase::ProjectDatabase(std::string project_root, std::vector<ContextEntry> entries,
                                 nlohmann::ordered_json encoder_description,
                                 std::vector<std::optional<EmbeddingVector>> embeddings,
                                 std::vector<IndexWarning> warnings)
    : project_root_(std::move(project_root)),
      entries_(std::move(entries)),
      encoder_(std::move(encoder_description)),
      embeddings_(std::move(embeddings)),
      warnings_(std::move(warnings)) {
    if (embeddings_.size() != entries_.size()) {
        throw DatabaseFormatError("embedding count " + std::to_string(embeddings_.size()) +
                                  " does not match entry count " + std::to_string(entries_.size()));
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.id != i) {
            throw DatabaseFormatError("entry ids must be dense and in list order (index " +
                                      std::to_string(i) + " has id " + std::to_string(e.id) + ")");
        }
        if (e.kind != EntryKind::Module && (!e.parent_id || *e.parent_id >= entries_.size())) {
            throw DatabaseFormatError("entry " + std::to_string(i) + " lacks a valid parent");
        }
        if (e.parent_id && *e.parent_id >= i) {
            throw DatabaseFormatError("entry " + std::to_string(i) + " precedes its parent");
        }
    }
    rebuild_derived();
}

void ProjectDatabase::rebuild_derived() {
    tables_ = derive_tables(entries_);
    children_.assign(entries_.size(), {});
    std::size_t dim = encoder_.contains("dim") ? encoder_["dim"].get<std::size_t>() : 0;
    index_ = std::make_shared<EmbeddingIndex>(dim);
    for (const auto& e : entries_) {
        name_index_.emplace(e.name, e.id);
        qualified_index_.emplace(e.qualified_name, e.id);
        if (e.kind == EntryKind::Module) {
            module_paths_.emplace(e.path, e.id);
        }
        if (e.parent_id) {
            children_[*e.parent_id].push_back(e.id);
        }
        if (embeddings_[e.id]) {
            index_->add({e.id, *embeddings_[e.id], entry_schema_text(e)});
        }
    }
}

std::vector<EntryId> ProjectDatabase::unembedded_entries() const {
    std::vector<EntryId> out;
    for (std::size_t i = 0; i < embeddings_.size(); ++i) {
        if (!embeddings_[i]) {
            out.push_back(i);
        }
    }
    return out;
}

std::optional<EntryId> ProjectDatabase::module_for_path(std::string_view relative_path) const {
    auto it = module_paths_.find(relative_path);
    if (it == module_paths_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<EntryId> ProjectDatabase::module_by_name(std::string_view dotted) const {
    for (const std::string& candidate : {std::string(dotted), std::string(dotted) + ".__init__"}) {
        auto [lo, hi] = qualified_index_.equal_range(candidate);
        for (auto it = lo; it != hi; ++it) {
            if (entries_[it->second].kind == EntryKind::Module) {
                return it->second;
            }
        }
    }
    return std::nullopt;
}

std::vector<EntryId> ProjectDatabase::children_of(EntryId id) const { return children_.at(id); }

EntryId ProjectDatabase::module_of(EntryId id) const {
    EntryId cur = id;
    while (entries_.at(cur).kind != EntryKind::Module) {
        cur = *entries_[cur].parent_id;
    }
    return cur;
}

std::optional<EntryId> ProjectDatabase::innermost_at(EntryId module, int line) const {
    if (!entries_.at(module).span.contains(line)) {
        return std::nullopt;
    }
    EntryId cur = module;
    for (bool descended = true; descended;) {
        descended = false;
        for (EntryId child : children_[cur]) {
            if (entries_[child].span.contains(line)) {
                cur = child;
                descended = true;
                break;
            }
        }
    }
    return cur;
}

std::vector<EntryId> ProjectDatabase::by_name(std::string_view simple_name) const {
    std::vector<EntryId> out;
    auto [lo, hi] = name_index_.equal_range(simple_name);
    for (auto it = lo; it != hi; ++it) {
        out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<EntryId> ProjectDatabase::by_qualified_name(std::string_view qualified) const {
    std::vector<EntryId> out;
    auto [lo, hi] = qualified_index_.equal_range(qualified);
    for (auto it = lo; it != hi; ++it) {
        out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> ProjectDatabase::source_lines(const ContextEntry& entry, std::size_t max_lines) const {
    std::vector<std::string> out;
    if (project_root_.empty()) {
        return out;
    }
    std::ifstream in(fs::path(project_root_) / entry.path);
    if (!in) {
        return out;
    }
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (n < entry.span.start) {
            continue;
        }
        if (n > entry.span.end || out.size() >= max_lines) {
            break;
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        out.push_back(line);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Build

ProjectDatabase build_database(std::vector<SourceUnit> sources, const TextEncoder& encoder,
                               std::string project_root, std::vector<IndexWarning> scan_warnings) {
    std::sort(sources.begin(), sources.end(),
              [](const SourceUnit& a, const SourceUnit& b) { return a.path < b.path; });
    std::vector<IndexWarning> warnings = std::move(scan_warnings);
    std::vector<ContextEntry> entries;
    for (const auto& unit : sources) {
        try {
            auto file_entries = extract_entries(unit, entries.size());
            for (auto& e : file_entries) {
                entries.push_back(std::move(e));
            }
        } catch (const py::SyntaxError& err) {
            warnings.push_back({unit.path, "parse failure at line " + std::to_string(err.line()) + ": " +
                                               err.what() + "; file skipped"});
        }
    }

    std::vector<std::string> passages;
    passages.reserve(entries.size());
    for (const auto& e : entries) {
        passages.push_back(entry_schema_text(e));
    }
    std::vector<std::optional<EmbeddingVector>> embeddings(entries.size());
    bool batch_ok = false;
    if (!passages.empty()) {
        try {
            auto vectors = encoder.encode_batch(passages);
            if (vectors.size() == passages.size()) {
                for (std::size_t i = 0; i < vectors.size(); ++i) {
                    embeddings[i] = std::move(vectors[i]);
                }
                batch_ok = true;
            }
        } catch (const Error&) {
            batch_ok = false;
        }
    }
    if (!batch_ok) {
        for (std::size_t i = 0; i < passages.size(); ++i) {
            try {
                embeddings[i] = encoder.encode(passages[i]);
            } catch (const Error& err) {
                warnings.push_back({entries[i].path, "entry " + entries[i].qualified_name +
                                                         " stored without embedding: " + err.what()});
            }
        }
    }
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        if (embeddings[i] && embeddings[i]->dim() != encoder.dim()) {
            warnings.push_back({entries[i].path, "entry " + entries[i].qualified_name +
                                                     " embedding has wrong dimension; dropped"});
            embeddings[i].reset();
        }
    }
    return ProjectDatabase(std::move(project_root), std::move(entries), encoder.describe(),
                           std::move(embeddings), std::move(warnings));
}

} // namespace ctxfix
