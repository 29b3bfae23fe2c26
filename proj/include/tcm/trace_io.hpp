#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tcm/signal.hpp"

namespace tcm {

// Two on-disk trace formats:
//  * binary: headerless little-endian float32 payload plus a JSON sidecar
//    `<file>.json` with {"sample_interval", "unit", "source_id", "n_samples"}
//  * CSV: optional `# key=value` comment lines (sample_interval, unit,
//    source_id), a header row `accel`, then one value per line.
// read_trace() picks the format by extension (.csv vs anything else).

Trace read_trace(const std::filesystem::path& path);
Trace read_trace_binary(const std::filesystem::path& path);
Trace read_trace_csv(const std::filesystem::path& path);
Trace parse_trace_csv(std::istream& in, const std::string& source_id);

void write_trace_binary(const std::filesystem::path& path, const Trace& trace);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);

/// CSV `start_index,end_index,start_s,end_s` (header always written).
void write_segments_csv(std::ostream& out, const std::vector<Segment>& segments,
                        double sample_interval);
void write_segments_csv(const std::filesystem::path& path,
                        const std::vector<Segment>& segments, double sample_interval);
std::vector<Segment> read_segments_csv(const std::filesystem::path& path);

}  // namespace tcm
