#pragma once

#include <fstream>
#include <functional>
#include <string>

#include "poi/errors.hpp"

#include <json.hpp>

namespace poi {

/// Opens a file for reading or throws IoError.
std::ifstream open_input(const std::string& path);

/// Opens a file for writing (truncating) or throws IoError.
std::ofstream open_output(const std::string& path, bool binary = false);

/// Calls fn(line_number, parsed_json) for every non-empty line. Line numbers
/// are 1-based. Malformed JSON raises ValidationError naming the line.
void for_each_jsonl(const std::string& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn);

/// Same over an already-open stream; `origin` labels error messages.
void for_each_jsonl_stream(std::istream& in, const std::string& origin,
                           const std::function<void(std::size_t, const nlohmann::json&)>& fn);

}  // namespace poi
