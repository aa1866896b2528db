#pragma once

#include <span>
#include <string>
#include <vector>

#include "poi/attr.hpp"
#include "poi/geo.hpp"
#include "poi/types.hpp"

namespace poi::ingest {

enum class ParseMode { lenient, strict };
enum class LogFormat { jsonl, csv };

/// One recoverable problem found while parsing (line-addressed).
struct ParseIssue {
    std::size_t line = 0;
    std::string message;
};

template <typename T>
struct ParseResult {
    std::vector<T> records;
    std::vector<ParseIssue> issues;  // empty in strict mode (strict throws instead)
};

/// Parses driving logs from JSONL or CSV. Lenient mode skips invalid records
/// and reports them; strict mode throws on the first violation. A duplicate
/// log_id is fatal in both modes.
ParseResult<DrivingLog> parse_logs(const std::string& path, LogFormat format,
                                   ParseMode mode = ParseMode::lenient);

/// Parses street-view image metadata from JSONL. Duplicate image_id is fatal.
ParseResult<StreetViewImage> parse_images(const std::string& path,
                                          ParseMode mode = ParseMode::lenient);

/// Parses per-image attribute records (extraction-response schema with an
/// {image_id, location_id} envelope). Lenient mode drops invalid signs but
/// keeps the record; strict mode throws on the first violation.
ParseResult<attr::AttributeRecord> parse_attributes(const std::string& path,
                                                    ParseMode mode = ParseMode::lenient);

/// Same parser over in-memory JSONL text; `origin` labels error messages.
ParseResult<attr::AttributeRecord> parse_attributes_text(const std::string& text,
                                                         const std::string& origin,
                                                         ParseMode mode = ParseMode::lenient);

/// Writes attribute records back out in the same JSONL schema.
void write_attributes(std::span<const attr::AttributeRecord> records, const std::string& path);

// Embedding container format, little-endian throughout:
//   magic "POIFV01\0" (8 bytes), u32 version = 1, u32 dim, u64 count,
//   u8 normalized, 7 reserved zero bytes   -- header, exactly 32 bytes
//   count*dim IEEE-754 binary32 values, row-major
// Ids sidecar: UTF-8 text, one image_id per line, line i <-> row i, LF line
// endings, no trailing blank line.

inline constexpr std::size_t kEmbeddingHeaderBytes = 32;

FeatureSet read_embeddings(const std::string& path, const std::string& ids_path);
void write_embeddings(const FeatureSet& fs, const std::string& path,
                      const std::string& ids_path);

/// Retrieval statistics; logs_with_returns counts sign-bearing logs whose
/// co-location entry is non-empty.
CorpusStats dataset_stats(std::span<const DrivingLog> logs, const geo::CoLocationTable& coloc);

}  // namespace poi::ingest
