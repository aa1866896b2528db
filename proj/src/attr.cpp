#include "poi/attr.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "poi/errors.hpp"
#include "poi/hash.hpp"

namespace poi::attr {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<const char*, N>& names, const std::string& s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (s == names[i]) return static_cast<E>(i);
    }
    return std::nullopt;
}

constexpr std::array<const char*, 7> kCategoryNames = {
    "regulatory", "warning", "informational", "guide", "construction", "school_zone", "other"};
constexpr std::array<const char*, 7> kShapeNames = {
    "circle", "triangle", "rectangle", "square", "octagon", "diamond", "inverted_triangle"};
constexpr std::array<const char*, 7> kColorNames = {
    "red", "white", "yellow", "black", "blue", "green", "none"};
constexpr std::array<const char*, 8> kSymbolNames = {
    "arrow", "pedestrian", "car", "bicycle", "stop_hand", "number", "none", "other"};

std::string normalize_text(const std::string& in) {
    std::string out;
    out.reserve(in.size());
    bool pending_space = false;
    for (char c : in) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (out.empty()) return "none";
    return out;
}

}  // namespace

const char* to_string(Category v) { return kCategoryNames[static_cast<std::size_t>(v)]; }
const char* to_string(Shape v) { return kShapeNames[static_cast<std::size_t>(v)]; }
const char* to_string(Color v) { return kColorNames[static_cast<std::size_t>(v)]; }
const char* to_string(SymbolKind v) { return kSymbolNames[static_cast<std::size_t>(v)]; }

std::optional<Category> category_from_string(const std::string& s) {
    return lookup<Category>(kCategoryNames, s);
}
std::optional<Shape> shape_from_string(const std::string& s) {
    return lookup<Shape>(kShapeNames, s);
}
std::optional<Color> color_from_string(const std::string& s) {
    return lookup<Color>(kColorNames, s);
}
std::optional<SymbolKind> symbol_from_string(const std::string& s) {
    return lookup<SymbolKind>(kSymbolNames, s);
}

bool same_attributes(const SignAttributes& a, const SignAttributes& b) {
    return a.category == b.category && a.shape == b.shape &&
           a.color_border == b.color_border && a.color_background == b.color_background &&
           a.color_symbol == b.color_symbol && a.symbol == b.symbol &&
           a.text == b.text && a.language == b.language;
}

SignAttributes canonicalize(const SignAttributes& s) {
    SignAttributes out = s;
    out.text = normalize_text(s.text);
    out.language = normalize_text(s.language);
    return out;
}

int hamming(const SignAttributes& a, const SignAttributes& b) {
    int d = 0;
    d += a.category != b.category;
    d += a.shape != b.shape;
    d += a.color_border != b.color_border;
    d += a.color_background != b.color_background;
    d += a.color_symbol != b.color_symbol;
    d += a.symbol != b.symbol;
    d += a.text != b.text;
    d += a.language != b.language;
    return d;
}

std::size_t SignHash::operator()(const SignAttributes& s) const {
    std::string key;
    key.reserve(s.text.size() + s.language.size() + 8);
    key.push_back(static_cast<char>(s.category));
    key.push_back(static_cast<char>(s.shape));
    key.push_back(static_cast<char>(s.color_border));
    key.push_back(static_cast<char>(s.color_background));
    key.push_back(static_cast<char>(s.color_symbol));
    key.push_back(static_cast<char>(s.symbol));
    key.push_back('\x1f');
    key += s.text;
    key.push_back('\x1f');
    key += s.language;
    return static_cast<std::size_t>(fnv1a64(key));
}

SignParseResult sign_from_json(const nlohmann::json& j) {
    SignParseResult r;
    if (!j.is_object()) {
        r.error = "sign is not a JSON object";
        return r;
    }
    SignAttributes s;
    try {
        if (j.contains("name") && j.at("name").is_string()) s.name = j.at("name").get<std::string>();

        const auto get_str = [&](const nlohmann::json& o, const char* field) -> std::string {
            if (!o.contains(field)) throw ValidationError(std::string("missing field: ") + field);
            const auto& v = o.at(field);
            if (!v.is_string()) throw ValidationError(std::string("field is not a string: ") + field);
            return v.get<std::string>();
        };

        const auto cat = category_from_string(get_str(j, "category"));
        if (!cat) throw ValidationError("unknown category: " + get_str(j, "category"));
        s.category = *cat;

        if (!j.contains("attributes") || !j.at("attributes").is_object())
            throw ValidationError("missing attributes object");
        const auto& attrs = j.at("attributes");

        const auto shp = shape_from_string(get_str(attrs, "shape"));
        if (!shp) throw ValidationError("unknown shape: " + get_str(attrs, "shape"));
        s.shape = *shp;

        if (!attrs.contains("color") || !attrs.at("color").is_object())
            throw ValidationError("missing color object");
        const auto& col = attrs.at("color");
        const auto parse_color = [&](const char* field) {
            const auto c = color_from_string(get_str(col, field));
            if (!c) throw ValidationError(std::string("unknown color.") + field + ": " + get_str(col, field));
            return *c;
        };
        s.color_border = parse_color("border");
        s.color_background = parse_color("background");
        s.color_symbol = parse_color("symbol");

        const auto sym = symbol_from_string(get_str(j, "symbol"));
        if (!sym) throw ValidationError("unknown symbol: " + get_str(j, "symbol"));
        s.symbol = *sym;

        s.text = get_str(j, "text");
        s.language = get_str(j, "language");
    } catch (const ValidationError& e) {
        r.error = e.what();
        return r;
    }
    r.sign = canonicalize(s);
    return r;
}

nlohmann::ordered_json sign_to_json(const SignAttributes& s) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["category"] = to_string(s.category);
    j["attributes"] = {
        {"shape", to_string(s.shape)},
        {"color",
         {{"border", to_string(s.color_border)},
          {"background", to_string(s.color_background)},
          {"symbol", to_string(s.color_symbol)}}},
    };
    j["symbol"] = to_string(s.symbol);
    j["text"] = s.text;
    j["language"] = s.language;
    return j;
}

AttributeSet dedup_location(const std::vector<AttributeRecord>& records) {
    AttributeSet set;
    for (const auto& rec : records) {
        for (const auto& sign : rec.signs) {
            set.insert_canonical(canonicalize(sign));
        }
    }
    return set;
}

AttributeSet build_source_set(const std::vector<AttributeRecord>& records) {
    return dedup_location(records);
}

int min_hamming(const SignAttributes& a, const AttributeSet& source) {
    if (source.empty()) throw ValidationError("empty source attribute set");
    int best = 8;
    for (const auto& cand : source.signs) {
        const int d = hamming(a, cand);
        if (d < best) {
            best = d;
            if (best == 0) break;
        }
    }
    return best;
}

PoiScore score_location_attr(const std::string& location_id,
                             const AttributeSet& location_set,
                             const AttributeSet& source) {
    if (source.empty()) throw ValidationError("empty source attribute set");
    long total = 0;
    for (const auto& sign : location_set.signs) {
        total += min_hamming(sign, source);
    }
    return PoiScore{location_id, static_cast<double>(total), ScoreMethod::attr};
}

}  // namespace poi::attr
