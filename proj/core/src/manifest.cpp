#include "wmlab/manifest.hpp"

#include <chrono>
#include <ctime>

#include <json.hpp>
#include <openssl/evp.h>

#include "wmlab/error.hpp"
#include "wmlab/serialization.hpp"

#ifndef WMLAB_VERSION
#define WMLAB_VERSION "unknown"
#endif

namespace wmlab {

using nlohmann::ordered_json;

const char* version() { return WMLAB_VERSION; }

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

ArtifactRecord artifact_record(const std::filesystem::path& path) {
    const std::string bytes = io::read_file(path);
    return {std::filesystem::absolute(path).lexically_normal().string(), sha256_hex(bytes), bytes.size()};
}

std::string manifest_id(const std::string& command, const std::vector<std::string>& args) {
    std::string key = command;
    for (const auto& a : args) {
        key += '\0';
        key += a;
    }
    key += '\0';
    key += version();
    return sha256_hex(key).substr(0, 16);
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

ordered_json records_json(const std::vector<ArtifactRecord>& v) {
    ordered_json a = ordered_json::array();
    for (const auto& r : v) a.push_back({{"path", r.path}, {"sha256", r.sha256}, {"bytes", r.bytes}});
    return a;
}

std::vector<ArtifactRecord> records_from(const ordered_json& a) {
    std::vector<ArtifactRecord> v;
    for (const auto& r : a) v.push_back({r.at("path").get<std::string>(), r.at("sha256").get<std::string>(), r.at("bytes").get<std::uintmax_t>()});
    return v;
}

}  // namespace

std::string manifest_to_text(const RunManifest& m) {
    ordered_json j;
    j["kind"] = "manifest";
    j["id"] = m.id;
    j["command"] = m.command;
    j["args"] = m.args;
    j["out_dir"] = m.out_dir;
    j["threads"] = m.threads;
    j["parameters"] = m.parameters;
    j["inputs"] = records_json(m.inputs);
    j["outputs"] = records_json(m.outputs);
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["code_version"] = m.code_version;
    return j.dump(2) + "\n";
}

RunManifest manifest_from_text(const std::string& text) {
    try {
        const auto j = ordered_json::parse(text);
        if (!j.is_object() || j.value("kind", "") != "manifest") throw ValidationError("not a manifest document");
        RunManifest m;
        m.id = j.at("id").get<std::string>();
        m.command = j.at("command").get<std::string>();
        m.args = j.at("args").get<std::vector<std::string>>();
        m.out_dir = j.at("out_dir").get<std::string>();
        m.threads = j.at("threads").get<int>();
        m.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
        m.inputs = records_from(j.at("inputs"));
        m.outputs = records_from(j.at("outputs"));
        m.started = j.at("started").get<std::string>();
        m.finished = j.at("finished").get<std::string>();
        m.code_version = j.at("code_version").get<std::string>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
}

void save_manifest(const std::filesystem::path& path, const RunManifest& m) { io::write_atomic(path, manifest_to_text(m)); }

RunManifest load_manifest(const std::filesystem::path& path) { return manifest_from_text(io::read_file(path)); }

}  // namespace wmlab
