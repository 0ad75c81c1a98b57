#pragma once

#include "ctxfix/python_syntax.hpp"
#include "ctxfix/semantic_retrieval.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ctxfix {

using EntryId = std::size_t;

enum class EntryKind { Module, Class, Function, Variable };

std::string_view to_string(EntryKind kind);
std::optional<EntryKind> entry_kind_from_string(std::string_view text);

/// 1-based inclusive line range.
struct LineSpan {
    int start = 1;
    int end = 1;

    bool contains(int line) const noexcept { return line >= start && line <= end; }
    bool contains(const LineSpan& other) const noexcept { return other.start >= start && other.end <= end; }
    friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct Signature {
    std::vector<py::Parameter> params;

    std::size_t defaulted_count() const;
    friend bool operator==(const Signature&, const Signature&) = default;
};

struct SourceUnit {
    std::string path;  // repository-relative, '/'-separated
    std::string text;
    std::string language_tag = "python";
};

struct IndexWarning {
    std::string path;
    std::string message;
};

struct ScanResult {
    std::vector<SourceUnit> units;
    std::vector<IndexWarning> warnings;
};

/// Collects files under `root` whose extension is in `extensions`, sorted by
/// relative path. Symlinked directories are not followed. Throws IoError when
/// root itself is unusable.
ScanResult scan_source_files(const std::filesystem::path& root,
                             const std::vector<std::string>& extensions = {".py"});

/// "sub/b.py" -> "sub.b"
std::string module_name_for_path(std::string_view relative_path);

struct ContextEntry {
    EntryId id = 0;
    EntryKind kind = EntryKind::Module;
    std::string name;
    std::string qualified_name;
    std::string path;
    std::optional<std::string> docstring;
    std::optional<Signature> signature;
    LineSpan span;
    std::optional<EntryId> parent_id;
    std::map<std::string, std::string> properties;

    friend bool operator==(const ContextEntry&, const ContextEntry&) = default;
};

/// The six relations over the entry parent graph. Tuples hold entry ids.
struct StructuralTables {
    std::vector<std::array<EntryId, 1>> modules;                 // M
    std::vector<std::array<EntryId, 2>> module_classes;          // M_C
    std::vector<std::array<EntryId, 3>> class_functions;         // M_C_CF
    std::vector<std::array<EntryId, 3>> class_variables;         // M_C_V
    std::vector<std::array<EntryId, 2>> global_functions;        // M_GF
    std::vector<std::array<EntryId, 2>> global_variables;        // M_GV

    bool empty() const noexcept;
    friend bool operator==(const StructuralTables&, const StructuralTables&) = default;
};

/// Derives all six tables from the parent graph. Entries must be id-dense.
///
/// A class takes part in the tables when every ancestor between it and its
/// module is a class; classes and functions local to a function body only
/// live in the entry graph.
StructuralTables derive_tables(const std::vector<ContextEntry>& entries);

/// Passage fed to the encoder: kind, qualified name, signature, docstring.
std::string entry_schema_text(const ContextEntry& entry);

/// Renders "(a, b=..., *args)" for a function signature.
std::string render_signature(const Signature& signature);

class ProjectDatabase {
public:
    static constexpr int kFormatVersion = 1;

    ProjectDatabase() = default;
    ProjectDatabase(std::string project_root, std::vector<ContextEntry> entries,
                    nlohmann::ordered_json encoder_description,
                    std::vector<std::optional<EmbeddingVector>> embeddings,
                    std::vector<IndexWarning> warnings = {});

    int format_version() const noexcept { return kFormatVersion; }
    const std::string& project_root() const noexcept { return project_root_; }
    const std::vector<ContextEntry>& entries() const noexcept { return entries_; }
    const ContextEntry& entry(EntryId id) const { return entries_.at(id); }
    const StructuralTables& tables() const noexcept { return tables_; }
    const EmbeddingIndex& embedding_index() const noexcept { return *index_; }
    const std::vector<std::optional<EmbeddingVector>>& embeddings() const noexcept { return embeddings_; }
    const nlohmann::ordered_json& encoder_description() const noexcept { return encoder_; }
    const std::vector<IndexWarning>& warnings() const noexcept { return warnings_; }

    /// Entries whose embedding could not be computed.
    std::vector<EntryId> unembedded_entries() const;

    /// Module entry for a repository-relative file path, if indexed.
    std::optional<EntryId> module_for_path(std::string_view relative_path) const;
    /// Module entry by dotted name; `pkg` also matches `pkg.__init__`.
    std::optional<EntryId> module_by_name(std::string_view dotted) const;
    /// Direct children of an entry, in id order.
    std::vector<EntryId> children_of(EntryId id) const;
    /// Nearest Module ancestor (the entry itself when it is a module).
    EntryId module_of(EntryId id) const;
    /// Innermost entry of `module` whose span contains `line`.
    std::optional<EntryId> innermost_at(EntryId module, int line) const;
    std::vector<EntryId> by_name(std::string_view simple_name) const;
    std::vector<EntryId> by_qualified_name(std::string_view qualified) const;

    /// Source lines [span.start, span.end] of an entry, read from project_root.
    std::vector<std::string> source_lines(const ContextEntry& entry, std::size_t max_lines) const;

private:
    void rebuild_derived();

    std::string project_root_;
    std::vector<ContextEntry> entries_;
    StructuralTables tables_;
    nlohmann::ordered_json encoder_;
    std::vector<std::optional<EmbeddingVector>> embeddings_;
    std::shared_ptr<EmbeddingIndex> index_ = std::make_shared<EmbeddingIndex>();
    std::vector<IndexWarning> warnings_;
    std::multimap<std::string, EntryId, std::less<>> name_index_;
    std::multimap<std::string, EntryId, std::less<>> qualified_index_;
    std::map<std::string, EntryId, std::less<>> module_paths_;
    std::vector<std::vector<EntryId>> children_;
};

/// Entries for one source file, ids starting at `first_id`. Pure; throws
/// py::SyntaxError when the file does not parse.
std::vector<ContextEntry> extract_entries(const SourceUnit& unit, EntryId first_id);

/// Builds the database: per-file extraction in path order, then encoding of
/// every entry's schema passage. Unparsable files are skipped with a warning;
/// encoder failures leave the entry without an embedding.
ProjectDatabase build_database(std::vector<SourceUnit> sources, const TextEncoder& encoder,
                               std::string project_root = {},
                               std::vector<IndexWarning> scan_warnings = {});

// Serialization (database_io.cpp)
nlohmann::ordered_json to_json(const ProjectDatabase& db);
ProjectDatabase database_from_json(const nlohmann::ordered_json& j);
std::string serialize_database(const ProjectDatabase& db);
ProjectDatabase deserialize_database(std::string_view text);
void save_database(const ProjectDatabase& db, const std::filesystem::path& path);
ProjectDatabase load_database(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ContextEntry& entry);
ContextEntry entry_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const StructuralTables& tables);

} // namespace ctxfix
