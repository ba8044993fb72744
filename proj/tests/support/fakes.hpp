#pragma once

#include "prefforge/pipeline/config.hpp"
#include "prefforge/provider/mock.hpp"
#include "prefforge/provider/types.hpp"

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <unistd.h>

namespace testing {

namespace fs = std::filesystem;
using prefforge::provider::StageTag;

// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                ("prefforge-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

inline std::size_t count_lines_in(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

inline std::size_t count_lines(const fs::path& path) { return count_lines_in(read_file(path)); }

// Raw questions q0000 .. q{n-1}.
inline void write_raw_questions(const fs::path& path, std::size_t n) {
    std::string content;
    for (std::size_t i = 0; i < n; ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "q%04zu", i);
        content += std::string("{\"id\":\"") + id + "\",\"q_raw\":\"How does mechanism " + std::to_string(i) +
                   " work?\"}\n";
    }
    write_file(path, content);
}

inline std::size_t tag_index(StageTag tag) { return static_cast<std::size_t>(tag); }

// Counts calls per stage tag and forwards to an inner generator.
class CountingGenerator final : public prefforge::provider::Generator {
public:
    explicit CountingGenerator(std::shared_ptr<Generator> inner = std::make_shared<prefforge::provider::MockGenerator>())
        : inner_(std::move(inner)) {}

    prefforge::provider::GenResponse complete(const prefforge::provider::GenRequest& request) override {
        ++counts_[tag_index(request.stage_tag)];
        return inner_->complete(request);
    }
    std::string id() const override { return "counting"; }

    std::size_t calls(StageTag tag) const { return counts_[tag_index(tag)].load(); }
    std::size_t total() const {
        std::size_t sum = 0;
        for (const auto& c : counts_) sum += c.load();
        return sum;
    }

private:
    std::shared_ptr<Generator> inner_;
    std::array<std::atomic<std::size_t>, 5> counts_{};
};

// Throws a provider error for requests the predicate selects.
class FaultInjectingGenerator final : public prefforge::provider::Generator {
public:
    using Predicate = std::function<bool(const prefforge::provider::GenRequest&)>;

    FaultInjectingGenerator(std::shared_ptr<Generator> inner, Predicate fail,
                            prefforge::provider::ErrorKind kind = prefforge::provider::ErrorKind::exhausted)
        : inner_(std::move(inner)), fail_(std::move(fail)), kind_(kind) {}

    prefforge::provider::GenResponse complete(const prefforge::provider::GenRequest& request) override {
        if (fail_(request)) {
            ++injected_;
            throw prefforge::provider::ProviderError(kind_, "injected failure for " + request.record_id);
        }
        return inner_->complete(request);
    }
    std::string id() const override { return "faulty"; }
    std::size_t injected() const { return injected_.load(); }

private:
    std::shared_ptr<Generator> inner_;
    Predicate fail_;
    prefforge::provider::ErrorKind kind_;
    std::atomic<std::size_t> injected_{0};
};

// Answers through a user-supplied function.
class ScriptedGenerator final : public prefforge::provider::Generator {
public:
    using Script = std::function<prefforge::provider::GenResponse(const prefforge::provider::GenRequest&)>;
    explicit ScriptedGenerator(Script script) : script_(std::move(script)) {}

    prefforge::provider::GenResponse complete(const prefforge::provider::GenRequest& request) override {
        ++calls_;
        return script_(request);
    }
    std::string id() const override { return "scripted"; }
    std::size_t calls() const { return calls_.load(); }

private:
    Script script_;
    std::atomic<std::size_t> calls_{0};
};

inline prefforge::provider::GenResponse text_response(std::string text) {
    prefforge::provider::GenResponse r;
    r.text = std::move(text);
    r.provider_id = "scripted";
    return r;
}

// Retriever returning fixed passages for every query.
class FixedRetriever final : public prefforge::provider::Retriever {
public:
    explicit FixedRetriever(std::vector<std::string> passages) : passages_(std::move(passages)) {}
    prefforge::provider::RetrievalResult retrieve(const std::string& query) override {
        std::vector<prefforge::provider::RetrievedPassage> raw;
        for (const auto& p : passages_) raw.push_back({p, std::nullopt});
        return prefforge::provider::assemble_retrieval(query, raw, prefforge::provider::MockRetriever::mock_cleanup_options());
    }
    std::string id() const override { return "fixed"; }

private:
    std::vector<std::string> passages_;
};

// Binds one generator to every stage of a mock configuration.
inline void bind_all(prefforge::pipeline::PipelineConfig& config,
                     const std::shared_ptr<prefforge::provider::Generator>& generator) {
    for (auto* b : {&config.enhance, &config.reject, &config.cot, &config.answer, &config.judge}) b->generator = generator;
}

// Deterministic choice of roughly `percent` of ids, by FNV-1a hash.
inline bool selected(const std::string& id, unsigned percent, std::uint64_t salt = 0) {
    std::uint64_t h = 1469598103934665603ULL ^ salt;
    for (unsigned char c : id) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h % 100 < percent;
}

inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace testing
