#include "prefforge/data/stage_io.hpp"

#include "prefforge/data/validate.hpp"

#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace prefforge::data {

namespace fs = std::filesystem;

namespace {

// Single writer per path within the process.
std::mutex& path_mutex(const fs::path& path) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<std::mutex>> registry;
    std::lock_guard lock(registry_mutex);
    auto& slot = registry[fs::absolute(path).lexically_normal().string()];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

template <class T>
ValidationReport validate_for_write(const T& record) {
    if constexpr (std::is_same_v<T, DpoTriple>) {
        // The directive is configurable; only the think blocks are checked here.
        ValidationOptions options;
        options.think_directive.clear();
        return validate_record(record, options);
    } else {
        return validate_record(record);
    }
}

}  // namespace

StageFileError::StageFileError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

template <class T>
std::string serialize_line(const T& record) {
    std::string out = record_to_json(record).dump(-1, ' ', false, Json::error_handler_t::strict);
    out.push_back('\n');
    return out;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    std::lock_guard lock(path_mutex(path));
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

template <class T>
void write_stage_file(std::span<const T> records, const fs::path& path) {
    std::vector<T> copy(records.begin(), records.end());
    if (auto ids = validate_ids(copy); !ids.ok()) {
        throw std::invalid_argument(ids.violations.front().to_string());
    }
    std::string content;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (auto report = validate_for_write(records[i]); !report.ok()) {
            throw std::invalid_argument("record " + std::to_string(i) + " (" + records[i].id +
                                        ") invalid: " + report.violations.front().to_string());
        }
        content += serialize_line(records[i]);
    }
    write_file_atomic(path, content);
}

std::vector<JsonLine> read_json_lines(const fs::path& path, bool skip_blank) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageFileError("cannot open " + path.string(), 0);
    std::vector<JsonLine> lines;
    std::string text;
    std::size_t number = 0;
    while (std::getline(in, text)) {
        ++number;
        if (text.empty() || text == "\r") {
            if (skip_blank) continue;
            throw StageFileError("blank line", number);
        }
        try {
            lines.push_back({number, Json::parse(text)});
        } catch (const Json::parse_error& err) {
            throw StageFileError(std::string("malformed JSON: ") + err.what(), number);
        }
    }
    return lines;
}

template <class T>
std::vector<T> read_stage_file(const fs::path& path, ReadMode mode) {
    std::vector<T> records;
    for (auto& line : read_json_lines(path, mode == ReadMode::lenient)) {
        try {
            records.push_back(record_from_json<T>(line.value, mode));
        } catch (const SchemaError& err) {
            throw StageFileError(err.what(), line.line);
        }
    }
    return records;
}

#define PREFFORGE_INSTANTIATE_STAGE_IO(T)                                                    \
    template std::string serialize_line<T>(const T&);                                        \
    template void write_stage_file<T>(std::span<const T>, const fs::path&);                  \
    template std::vector<T> read_stage_file<T>(const fs::path&, ReadMode);

PREFFORGE_INSTANTIATE_STAGE_IO(RawQuestion)
PREFFORGE_INSTANTIATE_STAGE_IO(EnhancedRecord)
PREFFORGE_INSTANTIATE_STAGE_IO(RejectedRecord)
PREFFORGE_INSTANTIATE_STAGE_IO(RagRecord)
PREFFORGE_INSTANTIATE_STAGE_IO(CotRecord)
PREFFORGE_INSTANTIATE_STAGE_IO(FinalRecord)
PREFFORGE_INSTANTIATE_STAGE_IO(DpoTriple)

#undef PREFFORGE_INSTANTIATE_STAGE_IO

}  // namespace prefforge::data
