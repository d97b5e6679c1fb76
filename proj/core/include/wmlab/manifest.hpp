#pragma once

#include <filesystem>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace wmlab {

const char* version();

struct ArtifactRecord {
    std::string path;  ///< absolute
    std::string sha256;
    std::uintmax_t bytes = 0;
};

/// Record of one CLI invocation. `args` is the normalized argument list
/// (input paths absolute, without --out), enough to re-run the command.
struct RunManifest {
    std::string id;
    std::string command;
    std::vector<std::string> args;
    std::string out_dir;
    int threads = 1;
    std::map<std::string, std::string> parameters;
    std::vector<ArtifactRecord> inputs;
    std::vector<ArtifactRecord> outputs;
    std::string started;
    std::string finished;
    std::string code_version;
};

std::string sha256_hex(const std::string& bytes);
/// Throws IoError if the file cannot be read.
ArtifactRecord artifact_record(const std::filesystem::path& path);

/// First 16 hex digits of the SHA-256 of command, args and code version.
std::string manifest_id(const std::string& command, const std::vector<std::string>& args);

/// UTC, ISO 8601.
std::string utc_timestamp();

std::string manifest_to_text(const RunManifest& m);
RunManifest manifest_from_text(const std::string& text);
void save_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace wmlab
