#include "poi/jsonl.hpp"

namespace poi {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

std::ofstream open_output(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

void for_each_jsonl_stream(std::istream& in, const std::string& origin,
                           const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            throw ValidationError(origin + ":" + std::to_string(line_no) +
                                  ": malformed JSON line");
        }
        fn(line_no, j);
    }
}

void for_each_jsonl(const std::string& path,
                    const std::function<void(std::size_t, const nlohmann::json&)>& fn) {
    auto in = open_input(path);
    for_each_jsonl_stream(in, path, fn);
}

}  // namespace poi
