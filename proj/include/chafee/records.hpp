#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "chafee/exit_mc.hpp"

namespace chafee {

// CSV persistence for exit records.  Files begin with a comment header
// carrying the hash of the generating config so downstream consumers can
// refuse mixed artifacts, followed by a fixed column line:
//   seed_id,epsilon,tau,normalized_tau,n_large_jumps,cause
// Doubles are written in shortest round-trip form.

std::string cause_name(ExitCause cause);
ExitCause cause_from_name(const std::string& name);  // throws on unknown names

struct RecordFile {
    std::string config_hash;
    std::vector<ExitRecord> records;
};

void save_records(const std::string& path, const std::string& config_hash,
                  const std::vector<ExitRecord>& records);
RecordFile load_records(const std::string& path);  // throws on malformed input

// Streaming writer: emits headers when starting fresh, flushes after
// every row so an interrupted run keeps all completed paths.
class RecordWriter {
public:
    RecordWriter(const std::string& path, const std::string& config_hash, bool append);
    void write(const ExitRecord& rec);

private:
    std::ofstream out_;
};

std::string format_record(const ExitRecord& rec);  // one CSV row, no newline

std::vector<std::uint64_t> recorded_seed_ids(const RecordFile& file);

}  // namespace chafee
