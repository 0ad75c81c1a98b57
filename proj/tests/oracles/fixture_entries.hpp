#pragma once

// Hand-enumerated from reading tests/fixtures/mini by eye. Independent of the indexer.

#include <string>
#include <vector>

namespace oracle {

struct ExpectedEntry {
    std::string kind;
    std::string qualified_name;
    std::string parent;  // qualified name of the parent, "" for modules
    std::string path;
    int start;
    int end;
};

inline const std::vector<ExpectedEntry>& mini_entries() {
    static const std::vector<ExpectedEntry> e = {
        {"Module", "aio._bolt3", "", "aio/_bolt3.py", 1, 20},
        {"Variable", "aio._bolt3.DEFAULT_PORT", "aio._bolt3", "aio/_bolt3.py", 3, 3},
        {"Class", "aio._bolt3.AsyncBolt3", "aio._bolt3", "aio/_bolt3.py", 6, 15},
        {"Variable", "aio._bolt3.AsyncBolt3.PROTOCOL_VERSION", "aio._bolt3.AsyncBolt3", "aio/_bolt3.py", 7, 7},
        {"Function", "aio._bolt3.AsyncBolt3.hello", "aio._bolt3.AsyncBolt3", "aio/_bolt3.py", 9, 11},
        {"Class", "aio._bolt3.AsyncBolt3.Response", "aio._bolt3.AsyncBolt3", "aio/_bolt3.py", 13, 15},
        {"Function", "aio._bolt3.AsyncBolt3.Response.on_success", "aio._bolt3.AsyncBolt3.Response", "aio/_bolt3.py", 14, 15},
        {"Class", "aio._bolt3.Helper", "aio._bolt3", "aio/_bolt3.py", 18, 20},
        {"Function", "aio._bolt3.Helper.encode", "aio._bolt3.Helper", "aio/_bolt3.py", 19, 20},
        {"Module", "bolt", "", "bolt.py", 1, 23},
        {"Variable", "bolt.PROTOCOL_VERSION", "bolt", "bolt.py", 3, 3},
        {"Class", "bolt.AsyncBolt", "bolt", "bolt.py", 6, 18},
        {"Variable", "bolt.AsyncBolt.protocol_version", "bolt.AsyncBolt", "bolt.py", 9, 9},
        {"Function", "bolt.AsyncBolt.__init__", "bolt.AsyncBolt", "bolt.py", 11, 13},
        {"Function", "bolt.AsyncBolt.get_handler", "bolt.AsyncBolt", "bolt.py", 15, 18},
        {"Function", "bolt.open_connection", "bolt", "bolt.py", 21, 23},
        {"Module", "util", "", "util.py", 1, 8},
        {"Variable", "util.MAX_RETRIES", "util", "util.py", 1, 1},
        {"Function", "util.backoff", "util", "util.py", 4, 8},
        {"Function", "util.backoff.clamp", "util.backoff", "util.py", 5, 6},
    };
    return e;
}

} // namespace oracle
