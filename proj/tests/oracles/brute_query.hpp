#pragma once

// Enumerates every assignment of entries to the FROM variables (kind checked
// per binding) and evaluates each condition straight off the parent graph.

#include "brute_tables.hpp"

#include <ctxfix/structural_query.hpp>

#include <map>
#include <set>
#include <vector>

namespace oracle {

inline bool class_reaches_module(const std::vector<ContextEntry>& es, EntryId c) {
    for (const auto& m : es) {
        if (m.kind == EntryKind::Module && class_chain_to(es, c, m.id)) return true;
    }
    return false;
}

inline bool brute_contains(const std::vector<ContextEntry>& es, const ContextEntry& a, const ContextEntry& b) {
    if (a.kind == EntryKind::Module) {
        if (b.kind == EntryKind::Function && b.parent_id && es[*b.parent_id].kind == EntryKind::Class) {
            return class_chain_to(es, *b.parent_id, a.id);
        }
        return b.kind != EntryKind::Module && child_of(b, a.id);
    }
    if (a.kind == EntryKind::Class && (b.kind == EntryKind::Function || b.kind == EntryKind::Variable)) {
        return child_of(b, a.id) && class_reaches_module(es, a.id);
    }
    return false;
}

inline std::vector<std::vector<EntryId>> brute_query(const ctxfix::StructuralQuery& q,
                                                     const std::vector<ContextEntry>& es) {
    using ctxfix::Predicate;
    std::set<std::vector<EntryId>> rows;
    std::size_t k = q.from.size();
    if (es.empty()) return {};
    std::vector<EntryId> bind(k, 0);
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < k; ++i) slot[q.from[i].name] = i;
    while (true) {
        bool ok = true;
        for (std::size_t i = 0; i < k && ok; ++i) ok = es[bind[i]].kind == q.from[i].kind;
        for (const auto& c : q.where) {
            if (!ok) break;
            const auto& s = es[bind[slot.at(c.subject)]];
            bool v = false;
            switch (c.predicate) {
            case Predicate::Contains: v = brute_contains(es, s, es[bind[slot.at(c.object)]]); break;
            case Predicate::GetScope: v = child_of(s, bind[slot.at(c.object)]); break;
            case Predicate::GetName:
                v = c.literal.find('.') == std::string::npos ? s.name == c.literal : s.qualified_name == c.literal;
                break;
            case Predicate::InSource: v = true; break;
            case Predicate::IsInitMethod:
                v = s.kind == EntryKind::Function && s.name == "__init__" && s.parent_id &&
                    es[*s.parent_id].kind == EntryKind::Class;
                break;
            }
            ok = v != c.negated;
        }
        if (ok) {
            std::vector<EntryId> row;
            for (const auto& item : q.select) row.push_back(bind[slot.at(item.variable)]);
            rows.insert(row);
        }
        std::size_t i = 0;
        while (i < k && ++bind[i] == es.size()) bind[i++] = 0;
        if (i == k) break;
    }
    return {rows.begin(), rows.end()};
}

} // namespace oracle
