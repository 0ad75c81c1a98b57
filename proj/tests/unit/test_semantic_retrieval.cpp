#include <doctest.h>

#include "oracles/exhaustive_topn.hpp"
#include "support.hpp"

#include <ctxfix/semantic_retrieval.hpp>

#include <cctype>
#include <cmath>
#include <random>
#include <set>

using namespace ctxfix;
using namespace testing_support;

namespace {

EmbeddingVector random_vector(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<float> g;
    EmbeddingVector v;
    for (std::size_t i = 0; i < dim; ++i) v.values.push_back(g(rng));
    return v;
}

// Lower-cased alphanumeric runs plus snake/camel pieces.
std::set<std::string> bag_of_tokens(const std::string& text) {
    std::set<std::string> out;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        std::string lower;
        for (char c : word) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.insert(lower);
        std::string piece;
        for (std::size_t i = 0; i < word.size(); ++i) {
            char c = word[i];
            bool boundary = c == '_' || (i > 0 && std::isupper(static_cast<unsigned char>(c)) &&
                                         std::islower(static_cast<unsigned char>(word[i - 1])));
            if (boundary && !piece.empty()) {
                out.insert(piece);
                piece.clear();
            }
            if (c != '_') piece += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        if (!piece.empty()) out.insert(piece);
        word.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') word += c;
        else flush();
    }
    flush();
    return out;
}

} // namespace

TEST_CASE("local embedder is deterministic and unit length") {
    LocalHashEncoder enc;
    auto a = enc.encode("Function bolt.AsyncBolt.get_handler(cls, version)");
    auto b = enc.encode("Function bolt.AsyncBolt.get_handler(cls, version)");
    CHECK(a == b);
    CHECK(a.dim() == LocalHashEncoder::kDefaultDim);
    double norm = 0;
    for (float x : a.values) norm += static_cast<double>(x) * x;
    CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(LocalHashEncoder(64, 1).encode("abc") != LocalHashEncoder(64, 2).encode("abc"));
}

TEST_CASE("passages without shared tokens are near-orthogonal") {
    LocalHashEncoder enc;
    auto db = index_project(fixture("mini"), 8);
    std::vector<std::string> passages;
    for (const auto& e : db.entries()) passages.push_back(entry_schema_text(e));
    int disjoint_pairs = 0;
    for (std::size_t i = 0; i < passages.size(); ++i) {
        for (std::size_t j = i + 1; j < passages.size(); ++j) {
            auto a = bag_of_tokens(passages[i]);
            auto b = bag_of_tokens(passages[j]);
            bool shared = false;
            for (const auto& t : a) shared = shared || b.count(t);
            if (shared) continue;
            ++disjoint_pairs;
            CAPTURE(passages[i]);
            CAPTURE(passages[j]);
            CHECK(cosine(enc.encode(passages[i]), enc.encode(passages[j])) <= 0.01);
        }
    }
    CHECK(disjoint_pairs > 0);
}

TEST_CASE("embedding tokens include identifier pieces") {
    auto toks = embedding_tokens("getHandler protocol_version");
    std::set<std::string> s(toks.begin(), toks.end());
    for (const char* t : {"gethandler", "get", "handler", "protocol_version", "protocol", "version"}) {
        CHECK(s.count(t) == 1);
    }
}

TEST_CASE("cosine identities") {
    EmbeddingVector x{{1.f, 0.f}}, y{{0.f, 1.f}}, d{{1.f, 1.f}};
    CHECK(cosine(x, y) == 0.0);
    CHECK(cosine(d, x) == doctest::Approx(0.70710678).epsilon(1e-6));
    CHECK(cosine(EmbeddingVector{{0.f, 0.f}}, x) == 0.0);
    CHECK_THROWS_AS(cosine(x, EmbeddingVector{{1.f, 2.f, 3.f}}), ContractViolation);

    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        auto a = random_vector(rng, 32);
        auto b = random_vector(rng, 32);
        CHECK(std::abs(cosine(a, a) - 1.0) < 1e-9);
        CHECK(cosine(a, b) == cosine(b, a));
        EmbeddingVector scaled = a;
        float alpha = std::uniform_real_distribution<float>(0.01f, 100.f)(rng);
        for (auto& v : scaled.values) v *= alpha;
        CHECK(std::abs(cosine(scaled, b) - cosine(a, b)) < 1e-6);
        double c = cosine(a, b);
        CHECK(c >= -1 - 1e-9);
        CHECK(c <= 1 + 1e-9);
    }
}

TEST_CASE("top_n matches the exhaustive scan") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t dim = 4 + trial % 12;
        std::size_t rows = std::uniform_int_distribution<std::size_t>(0, 300)(rng);
        EmbeddingIndex index(dim);
        for (std::size_t i = 0; i < rows; ++i) index.add({i * 3 + 1, random_vector(rng, dim), ""});
        auto q = random_vector(rng, dim);
        for (std::size_t n : {std::size_t{1}, std::size_t{5}, std::size_t{17}, rows + 3}) {
            auto got = top_n(q, index, n);
            auto want = oracle::exhaustive_top(q.values, index.rows(), n);
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].entry_id == want[i].entry_id);
                CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("top_n edge cases") {
    EmbeddingIndex index(2);
    index.add({5, {{1.f, 0.f}}, ""});
    index.add({2, {{1.f, 0.f}}, ""});
    index.add({9, {{0.f, 1.f}}, ""});
    auto r = top_n(EmbeddingVector{{1.f, 0.f}}, index, 5);
    REQUIRE(r.size() == 3);
    CHECK(r[0].entry_id == 2);
    CHECK(r[1].entry_id == 5);
    CHECK(top_n(EmbeddingVector{{1.f, 0.f}}, EmbeddingIndex(2), 5).empty());
    CHECK_THROWS_AS(top_n(EmbeddingVector{{1.f, 0.f, 0.f}}, index, 1), ContractViolation);
}

TEST_CASE("index rejects bad rows") {
    EmbeddingIndex index(2);
    index.add({1, {{1.f, 0.f}}, ""});
    CHECK_THROWS_AS(index.add({1, {{0.f, 1.f}}, ""}), ContractViolation);
    CHECK_THROWS_AS(index.add({2, {{0.f, 1.f, 0.f}}, ""}), ContractViolation);
    CHECK_THROWS_AS(index.add({3, {{NAN, 1.f}}, ""}), ContractViolation);
}

TEST_CASE("text retrieval over the fixture ranks the docstring match first") {
    LocalHashEncoder enc(512);
    auto db = index_project(fixture("mini"), 512);
    auto hits = top_n(RetrievalQuery{"Return Bolt protocol handlers", RetrievalMode::Initial}, db.embedding_index(), enc, 5);
    REQUIRE(hits.size() == 5);
    CHECK(db.entry(hits[0].entry_id).qualified_name == "bolt.AsyncBolt.get_handler");
}

TEST_CASE("encoder description rebuilds the same encoder") {
    LocalHashEncoder enc(128, 42);
    auto again = make_encoder(enc.describe());
    CHECK(again->dim() == 128);
    CHECK(again->encode("hello world") == enc.encode("hello world"));
    CHECK_THROWS_AS(make_encoder(nlohmann::ordered_json{{"kind", "mystery"}}), ConfigError);
}

TEST_CASE("remote encoder needs its key") {
    RemoteEncoderOptions opts;
    opts.api_key_env = "CTXFIX_TEST_UNSET_KEY_VARIABLE";
    CHECK_THROWS_AS(RemoteEncoder{opts}, ConfigError);
}
