#include "ctxfix/diagnostics.hpp"
#include "ctxfix/process.hpp"

#include <json.hpp>

#include <cstdlib>

namespace ctxfix {

std::vector<Diagnostic> parse_checker_output(std::string_view output) {
    nlohmann::json parsed;
    std::string_view trimmed = output;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.front()))) {
        trimmed.remove_prefix(1);
    }
    if (trimmed.empty()) {
        // pylint prints nothing at all for some clean runs
        return {};
    }
    try {
        parsed = nlohmann::json::parse(trimmed);
    } catch (const nlohmann::json::parse_error& ex) {
        throw ProtocolError(std::string("analyzer output is not JSON: ") + ex.what());
    }
    if (!parsed.is_array()) {
        throw ProtocolError("analyzer output is not a JSON array");
    }
    std::vector<Diagnostic> out;
    for (const auto& item : parsed) {
        if (!item.is_object()) {
            throw ProtocolError("analyzer message is not an object");
        }
        try {
            if (item.at("type").get<std::string>() != "error") {
                continue;
            }
            int column = item.contains("column") && item["column"].is_number() ? item["column"].get<int>() : 0;
            out.push_back(make_diagnostic(item.at("message-id").get<std::string>(),
                                          item.at("message").get<std::string>(),
                                          item.at("path").get<std::string>(), item.at("line").get<int>(),
                                          column));
        } catch (const nlohmann::json::exception& ex) {
            throw ProtocolError(std::string("analyzer message is missing fields: ") + ex.what());
        }
    }
    return out;
}

std::vector<Diagnostic> run_external_checker(const std::filesystem::path& file,
                                             const std::filesystem::path& project_root,
                                             const ExternalCheckerConfig& config) {
    ProcessOptions opts;
    opts.argv.push_back(config.analyzer);
    opts.argv.emplace_back("--output-format");
    opts.argv.emplace_back("json");
    for (const auto& a : config.extra_args) {
        opts.argv.push_back(a);
    }
    opts.argv.push_back(file.string());
    opts.working_directory = project_root;
    opts.timeout = config.timeout;
    ProcessResult res = run_process(opts);
    if (res.timed_out) {
        throw ToolUnavailable("analyzer '" + config.analyzer + "' timed out");
    }
    if (res.exit_code == 127 && res.stdout_text.empty()) {
        throw ToolUnavailable("analyzer '" + config.analyzer + "' could not run: " + res.stderr_text);
    }
    // Nonzero exit codes encode which message classes were emitted; not a failure.
    return parse_checker_output(res.stdout_text);
}

} // namespace ctxfix
