#include "poi/ingest.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "poi/errors.hpp"
#include "poi/jsonl.hpp"

namespace poi::ingest {

namespace {

constexpr char kMagic[8] = {'P', 'O', 'I', 'F', 'V', '0', '1', '\0'};
constexpr std::uint32_t kVersion = 1;

void report_or_throw(std::vector<ParseIssue>& issues, ParseMode mode, const std::string& path,
                     std::size_t line, const std::string& message) {
    if (mode == ParseMode::strict) {
        throw ValidationError(path + ":" + std::to_string(line) + ": " + message);
    }
    issues.push_back({line, message});
}

bool valid_country(const std::string& c) {
    return c.size() == 2 && c[0] >= 'A' && c[0] <= 'Z' && c[1] >= 'A' && c[1] <= 'Z';
}

std::string validate_log(const DrivingLog& log) {
    if (log.log_id.empty()) return "empty log_id";
    if (!coords_in_bounds(log.lat, log.lon)) return "coordinates out of bounds";
    if (!valid_country(log.country)) return "country must be exactly 2 uppercase letters";
    return {};
}

std::string validate_image(const StreetViewImage& img) {
    if (img.image_id.empty()) return "empty image_id";
    if (!coords_in_bounds(img.lat, img.lon)) return "coordinates out of bounds";
    if (img.captured_at && *img.captured_at < 0) return "captured_at must be >= 0";
    return {};
}

// Minimal CSV field splitter with double-quote support.
std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

void put_u32_le(std::string& buf, std::uint32_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
    buf.push_back(static_cast<char>((v >> 16) & 0xff));
    buf.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u64_le(std::string& buf, std::uint64_t v) {
    put_u32_le(buf, static_cast<std::uint32_t>(v & 0xffffffffull));
    put_u32_le(buf, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t get_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
           static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint64_t get_u64_le(const unsigned char* p) {
    return static_cast<std::uint64_t>(get_u32_le(p)) |
           static_cast<std::uint64_t>(get_u32_le(p + 4)) << 32;
}

}  // namespace

ParseResult<DrivingLog> parse_logs(const std::string& path, LogFormat format, ParseMode mode) {
    ParseResult<DrivingLog> result;
    std::unordered_set<std::string> seen_ids;

    const auto accept = [&](std::size_t line, DrivingLog log) {
        const std::string err = validate_log(log);
        if (!err.empty()) {
            report_or_throw(result.issues, mode, path, line, err);
            return;
        }
        if (!seen_ids.insert(log.log_id).second) {
            // Silent dedup would corrupt the location->log mapping downstream.
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": duplicate log_id: " + log.log_id);
        }
        result.records.push_back(std::move(log));
    };

    if (format == LogFormat::jsonl) {
        for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
            DrivingLog log;
            try {
                log.log_id = j.at("log_id").get<std::string>();
                log.lat = j.at("lat").get<double>();
                log.lon = j.at("lon").get<double>();
                log.country = j.at("country").get<std::string>();
                const auto split = split_from_string(j.at("split").get<std::string>());
                if (!split) throw ValidationError("unknown split value");
                log.split = *split;
                log.has_traffic_sign = j.at("has_traffic_sign").get<bool>();
            } catch (const nlohmann::json::exception& e) {
                report_or_throw(result.issues, mode, path, line,
                                std::string("bad record: ") + e.what());
                return;
            } catch (const ValidationError&) {
                report_or_throw(result.issues, mode, path, line, "unknown split value");
                return;
            }
            accept(line, std::move(log));
        });
        return result;
    }

    // CSV: fixed column order, header row required.
    auto in = open_input(path);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ValidationError(path + ": missing CSV header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "log_id,lat,lon,country,split,has_traffic_sign") {
        throw ValidationError(path + ": malformed CSV header: " + line);
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 6) {
            report_or_throw(result.issues, mode, path, line_no, "expected 6 CSV fields");
            continue;
        }
        DrivingLog log;
        log.log_id = fields[0];
        try {
            log.lat = std::stod(fields[1]);
            log.lon = std::stod(fields[2]);
        } catch (const std::exception&) {
            report_or_throw(result.issues, mode, path, line_no, "non-numeric coordinate");
            continue;
        }
        log.country = fields[3];
        const auto split = split_from_string(fields[4]);
        if (!split) {
            report_or_throw(result.issues, mode, path, line_no, "unknown split value: " + fields[4]);
            continue;
        }
        log.split = *split;
        if (fields[5] == "true") {
            log.has_traffic_sign = true;
        } else if (fields[5] == "false") {
            log.has_traffic_sign = false;
        } else {
            report_or_throw(result.issues, mode, path, line_no,
                            "has_traffic_sign must be true/false");
            continue;
        }
        accept(line_no, std::move(log));
    }
    return result;
}

ParseResult<StreetViewImage> parse_images(const std::string& path, ParseMode mode) {
    ParseResult<StreetViewImage> result;
    std::unordered_set<std::string> seen_ids;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        StreetViewImage img;
        try {
            img.image_id = j.at("image_id").get<std::string>();
            img.lat = j.at("lat").get<double>();
            img.lon = j.at("lon").get<double>();
            if (j.contains("captured_at") && !j.at("captured_at").is_null()) {
                img.captured_at = j.at("captured_at").get<std::int64_t>();
            }
            if (j.contains("source_url") && !j.at("source_url").is_null()) {
                img.source_url = j.at("source_url").get<std::string>();
            }
        } catch (const nlohmann::json::exception& e) {
            report_or_throw(result.issues, mode, path, line,
                            std::string("bad record: ") + e.what());
            return;
        }
        const std::string err = validate_image(img);
        if (!err.empty()) {
            report_or_throw(result.issues, mode, path, line, err);
            return;
        }
        if (!seen_ids.insert(img.image_id).second) {
            throw ValidationError(path + ":" + std::to_string(line) +
                                  ": duplicate image_id: " + img.image_id);
        }
        result.records.push_back(std::move(img));
    });
    return result;
}

namespace {

void parse_attribute_line(ParseResult<attr::AttributeRecord>& result, ParseMode mode,
                          const std::string& origin, std::size_t line,
                          const nlohmann::json& j) {
    attr::AttributeRecord rec;
    try {
        rec.image_id = j.at("image_id").get<std::string>();
        rec.location_id = j.at("location_id").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        report_or_throw(result.issues, mode, origin, line,
                        std::string("bad envelope: ") + e.what());
        return;
    }
    if (rec.image_id.empty()) {
        report_or_throw(result.issues, mode, origin, line, "empty image_id");
        return;
    }
    if (!j.contains("signs") || !j.at("signs").is_array()) {
        report_or_throw(result.issues, mode, origin, line, "missing signs array");
        return;
    }
    for (const auto& sj : j.at("signs")) {
        auto parsed = attr::sign_from_json(sj);
        if (parsed.sign) {
            rec.signs.push_back(std::move(*parsed.sign));
        } else {
            // One hallucinated enum value should not erase valid detections.
            report_or_throw(result.issues, mode, origin, line, "dropped sign: " + parsed.error);
        }
    }
    result.records.push_back(std::move(rec));
}

}  // namespace

ParseResult<attr::AttributeRecord> parse_attributes(const std::string& path, ParseMode mode) {
    ParseResult<attr::AttributeRecord> result;
    for_each_jsonl(path, [&](std::size_t line, const nlohmann::json& j) {
        parse_attribute_line(result, mode, path, line, j);
    });
    return result;
}

ParseResult<attr::AttributeRecord> parse_attributes_text(const std::string& text,
                                                         const std::string& origin,
                                                         ParseMode mode) {
    ParseResult<attr::AttributeRecord> result;
    std::istringstream in(text);
    for_each_jsonl_stream(in, origin, [&](std::size_t line, const nlohmann::json& j) {
        parse_attribute_line(result, mode, origin, line, j);
    });
    return result;
}

void write_attributes(std::span<const attr::AttributeRecord> records, const std::string& path) {
    auto out = open_output(path);
    for (const auto& rec : records) {
        nlohmann::ordered_json row;
        row["image_id"] = rec.image_id;
        row["location_id"] = rec.location_id;
        auto signs = nlohmann::ordered_json::array();
        for (const auto& s : rec.signs) signs.push_back(attr::sign_to_json(s));
        row["signs"] = std::move(signs);
        out << row.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

FeatureSet read_embeddings(const std::string& path, const std::string& ids_path) {
    auto in = open_input(path);
    unsigned char header[kEmbeddingHeaderBytes];
    in.read(reinterpret_cast<char*>(header), kEmbeddingHeaderBytes);
    if (in.gcount() != static_cast<std::streamsize>(kEmbeddingHeaderBytes)) {
        throw ValidationError(path + ": truncated header");
    }
    if (std::memcmp(header, kMagic, 8) != 0) throw ValidationError(path + ": bad magic");
    if (get_u32_le(header + 8) != kVersion) {
        throw ValidationError(path + ": unsupported version " +
                              std::to_string(get_u32_le(header + 8)));
    }
    const std::uint32_t dim = get_u32_le(header + 12);
    const std::uint64_t count = get_u64_le(header + 16);
    const unsigned char normalized = header[24];
    if (dim == 0) throw ValidationError(path + ": dim must be positive");
    if (normalized > 1) throw ValidationError(path + ": bad normalized flag");
    for (int i = 25; i < 32; ++i) {
        if (header[i] != 0) throw ValidationError(path + ": nonzero reserved header bytes");
    }

    // Check the payload size against the header before allocating anything.
    const auto data_begin = in.tellg();
    in.seekg(0, std::ios::end);
    const std::uint64_t actual_payload = static_cast<std::uint64_t>(in.tellg() - data_begin);
    in.seekg(data_begin);
    if (count > std::numeric_limits<std::uint64_t>::max() / 4 / dim) {
        throw ValidationError(path + ": header count overflows");
    }
    const std::uint64_t expected_payload = count * static_cast<std::uint64_t>(dim) * 4;
    if (actual_payload != expected_payload) {
        throw ValidationError(path + ": payload is " + std::to_string(actual_payload) +
                              " bytes, header implies " + std::to_string(expected_payload));
    }

    FeatureSet fs;
    fs.dim = dim;
    fs.normalized = normalized == 1;
    fs.data.resize(static_cast<std::size_t>(count) * dim);

    if (!fs.data.empty()) {
        in.read(reinterpret_cast<char*>(fs.data.data()),
                static_cast<std::streamsize>(fs.data.size() * sizeof(float)));
        if (in.gcount() != static_cast<std::streamsize>(fs.data.size() * sizeof(float))) {
            throw ValidationError(path + ": payload shorter than header count");
        }
        if constexpr (std::endian::native != std::endian::little) {
            for (float& f : fs.data) {
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                bits = __builtin_bswap32(bits);
                std::memcpy(&f, &bits, 4);
            }
        }
    }

    auto ids_in = open_input(ids_path);
    std::string line;
    fs.row_ids.reserve(count);
    while (std::getline(ids_in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        fs.row_ids.push_back(line);
    }
    if (fs.row_ids.size() != count) {
        throw ValidationError(ids_path + ": ids count " + std::to_string(fs.row_ids.size()) +
                              " does not match embedding count " + std::to_string(count));
    }

    for (std::size_t i = 0; i < fs.data.size(); ++i) {
        if (!std::isfinite(fs.data[i])) {
            throw ValidationError(path + ": non-finite value at row " + std::to_string(i / dim));
        }
    }
    fs.validate();
    return fs;
}

void write_embeddings(const FeatureSet& fs, const std::string& path,
                      const std::string& ids_path) {
    fs.validate();

    std::string header;
    header.reserve(kEmbeddingHeaderBytes);
    header.append(kMagic, 8);
    put_u32_le(header, kVersion);
    put_u32_le(header, fs.dim);
    put_u64_le(header, fs.count());
    header.push_back(fs.normalized ? '\x01' : '\x00');
    header.append(7, '\0');

    auto out = open_output(path, /*binary=*/true);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    if (!fs.data.empty()) {
        if constexpr (std::endian::native == std::endian::little) {
            out.write(reinterpret_cast<const char*>(fs.data.data()),
                      static_cast<std::streamsize>(fs.data.size() * sizeof(float)));
        } else {
            std::string buf;
            buf.reserve(fs.data.size() * 4);
            for (const float f : fs.data) {
                std::uint32_t bits;
                std::memcpy(&bits, &f, 4);
                put_u32_le(buf, bits);
            }
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        }
    }
    if (!out) throw IoError("write failed: " + path);

    auto ids_out = open_output(ids_path, /*binary=*/true);
    for (const auto& id : fs.row_ids) ids_out << id << '\n';
    if (!ids_out) throw IoError("write failed: " + ids_path);
}

CorpusStats dataset_stats(std::span<const DrivingLog> logs, const geo::CoLocationTable& coloc) {
    CorpusStats stats;
    stats.total_logs = logs.size();
    for (const auto& log : logs) {
        if (!log.has_traffic_sign) continue;
        ++stats.logs_with_sign;
        const auto* entry = coloc.find(log.log_id);
        if (entry != nullptr && !entry->images.empty()) ++stats.logs_with_returns;
    }
    stats.return_ratio = stats.logs_with_sign == 0
                             ? 0.0
                             : static_cast<double>(stats.logs_with_returns) /
                                   static_cast<double>(stats.logs_with_sign);
    return stats;
}

}  // namespace poi::ingest
