#include "chafee/records.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace chafee {

namespace {

constexpr const char* kColumns = "seed_id,epsilon,tau,normalized_tau,n_large_jumps,cause";

void append_num(std::string& out, double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            parts.push_back(line.substr(pos));
            return parts;
        }
        parts.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
}

[[noreturn]] void malformed(const std::string& path, int line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string cause_name(ExitCause cause) {
    switch (cause) {
        case ExitCause::LargeJump: return "large_jump";
        case ExitCause::DriftOrSmallNoise: return "drift_or_small_noise";
        case ExitCause::Censored: return "censored";
    }
    return "unknown";
}

ExitCause cause_from_name(const std::string& name) {
    if (name == "large_jump") return ExitCause::LargeJump;
    if (name == "drift_or_small_noise") return ExitCause::DriftOrSmallNoise;
    if (name == "censored") return ExitCause::Censored;
    throw std::runtime_error("unknown exit cause '" + name + "'");
}

std::string format_record(const ExitRecord& rec) {
    std::string out = std::to_string(rec.seed_id);
    out += ',';
    append_num(out, rec.epsilon);
    out += ',';
    append_num(out, rec.tau);
    out += ',';
    append_num(out, rec.normalized_tau);
    out += ',';
    out += std::to_string(rec.n_large_jumps);
    out += ',';
    out += cause_name(rec.cause);
    return out;
}

void save_records(const std::string& path, const std::string& config_hash,
                  const std::vector<ExitRecord>& records) {
    RecordWriter writer(path, config_hash, /*append=*/false);
    for (const auto& rec : records) writer.write(rec);
}

RecordFile load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open record file '" + path + "'");
    RecordFile file;
    std::string line;
    int lineno = 0;
    bool saw_columns = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# config_hash=";
            if (line.rfind(tag, 0) == 0) file.config_hash = line.substr(tag.size());
            continue;
        }
        if (!saw_columns) {
            if (line != kColumns) malformed(path, lineno, "unexpected column header");
            saw_columns = true;
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != 6) malformed(path, lineno, "expected 6 columns");
        ExitRecord rec;
        auto num = [&](const std::string& s, double& out) {
            auto res = std::from_chars(s.data(), s.data() + s.size(), out);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                malformed(path, lineno, "bad number '" + s + "'");
        };
        auto u64 = [&](const std::string& s, std::uint64_t& out) {
            auto res = std::from_chars(s.data(), s.data() + s.size(), out);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                malformed(path, lineno, "bad integer '" + s + "'");
        };
        u64(parts[0], rec.seed_id);
        num(parts[1], rec.epsilon);
        num(parts[2], rec.tau);
        num(parts[3], rec.normalized_tau);
        std::uint64_t jumps;
        u64(parts[4], jumps);
        rec.n_large_jumps = static_cast<long>(jumps);
        try {
            rec.cause = cause_from_name(parts[5]);
        } catch (const std::runtime_error& e) {
            malformed(path, lineno, e.what());
        }
        file.records.push_back(rec);
    }
    if (!saw_columns && !file.records.empty())
        malformed(path, lineno, "missing column header");
    return file;
}

RecordWriter::RecordWriter(const std::string& path, const std::string& config_hash,
                           bool append) {
    bool fresh = true;
    if (append) {
        std::ifstream probe(path);
        fresh = !probe.good() || probe.peek() == std::ifstream::traits_type::eof();
    }
    out_.open(path, append ? std::ios::app : std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open record file '" + path + "' for writing");
    if (fresh) out_ << "# config_hash=" << config_hash << "\n" << kColumns << "\n";
}

void RecordWriter::write(const ExitRecord& rec) {
    out_ << format_record(rec) << "\n";
    out_.flush();
}

std::vector<std::uint64_t> recorded_seed_ids(const RecordFile& file) {
    std::vector<std::uint64_t> ids;
    ids.reserve(file.records.size());
    for (const auto& rec : file.records) ids.push_back(rec.seed_id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace chafee
