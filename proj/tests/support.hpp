#pragma once

#include <ctxfix/context_index.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testing_support {

namespace fs = std::filesystem;

inline fs::path fixture(const std::string& rel = {}) { return fs::path(CTXFIX_FIXTURE_DIR) / rel; }

inline std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("ctxfix-test-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    fs::path path_;
};

/// Copies the mini project so tests that edit files leave the fixture alone.
inline fs::path copy_mini(const TempDir& dir) {
    fs::path dst = dir / "mini";
    fs::copy(fixture("mini"), dst, fs::copy_options::recursive);
    return dst;
}

inline ctxfix::ProjectDatabase index_project(const fs::path& root, std::size_t dim = 256) {
    ctxfix::LocalHashEncoder enc(dim);
    auto scan = ctxfix::scan_source_files(root);
    return ctxfix::build_database(std::move(scan.units), enc, root.string(), std::move(scan.warnings));
}

inline bool on_path(const std::string& tool) {
    std::string cmd = "command -v " + tool + " >/dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
}

} // namespace testing_support
