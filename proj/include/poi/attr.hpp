#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "poi/types.hpp"

#include <json.hpp>

namespace poi::attr {

// Fixed ontology for structured traffic-sign attributes.

enum class Category : std::uint8_t {
    regulatory, warning, informational, guide, construction, school_zone, other
};

enum class Shape : std::uint8_t {
    circle, triangle, rectangle, square, octagon, diamond, inverted_triangle
};

enum class Color : std::uint8_t { red, white, yellow, black, blue, green, none };

enum class SymbolKind : std::uint8_t {
    arrow, pedestrian, car, bicycle, stop_hand, number, none, other
};

const char* to_string(Category v);
const char* to_string(Shape v);
const char* to_string(Color v);
const char* to_string(SymbolKind v);

std::optional<Category> category_from_string(const std::string& s);
std::optional<Shape> shape_from_string(const std::string& s);
std::optional<Color> color_from_string(const std::string& s);
std::optional<SymbolKind> symbol_from_string(const std::string& s);

/// One detected traffic sign: 8 comparable attribute fields plus a free-text
/// name carried as metadata only (never part of distances or dedup).
struct SignAttributes {
    Category category = Category::other;
    Shape shape = Shape::circle;
    Color color_border = Color::none;
    Color color_background = Color::none;
    Color color_symbol = Color::none;
    SymbolKind symbol = SymbolKind::none;
    std::string text = "none";
    std::string language = "none";
    std::string name;  // metadata, excluded from the 8 compared fields
};

/// Equality over the 8 compared fields (name ignored).
bool same_attributes(const SignAttributes& a, const SignAttributes& b);

/// Trims, case-folds, and collapses internal whitespace in text/language;
/// empty text or language becomes the literal "none". Idempotent.
SignAttributes canonicalize(const SignAttributes& s);

/// Count of the 8 fields on which a and b differ. Both must be canonical.
int hamming(const SignAttributes& a, const SignAttributes& b);

struct SignHash {
    std::size_t operator()(const SignAttributes& s) const;
};
struct SignEq {
    bool operator()(const SignAttributes& a, const SignAttributes& b) const {
        return same_attributes(a, b);
    }
};

/// Deduplicated set of canonical sign attribute vectors (A(l) or A_S).
struct AttributeSet {
    std::unordered_set<SignAttributes, SignHash, SignEq> signs;

    bool empty() const { return signs.empty(); }
    std::size_t size() const { return signs.size(); }
    void insert_canonical(const SignAttributes& s) { signs.insert(s); }
    bool contains(const SignAttributes& s) const { return signs.count(s) > 0; }
};

/// Per-image extraction output tied to the log it is co-located with.
struct AttributeRecord {
    std::string image_id;
    std::string location_id;
    std::vector<SignAttributes> signs;
};

/// Parses one sign object in the extraction-response schema; returns an error
/// message instead of a sign when any field violates the ontology.
struct SignParseResult {
    std::optional<SignAttributes> sign;
    std::string error;
};
SignParseResult sign_from_json(const nlohmann::json& j);

/// Serializes a sign back into the extraction-response schema.
nlohmann::ordered_json sign_to_json(const SignAttributes& s);

/// Union of canonicalized signs across one location's records, duplicates
/// removed by exact 8-field equality. All records must share location_id.
AttributeSet dedup_location(const std::vector<AttributeRecord>& records);

/// Global dedup across all source-country records: A_S.
AttributeSet build_source_set(const std::vector<AttributeRecord>& records);

/// min over the source set of hamming(a, .). Throws ValidationError when the
/// source set is empty.
int min_hamming(const SignAttributes& a, const AttributeSet& source);

/// s(l) = sum over signs in the location set of min_hamming. Zero for an
/// empty location set. Throws ValidationError when the source set is empty.
PoiScore score_location_attr(const std::string& location_id,
                             const AttributeSet& location_set,
                             const AttributeSet& source);

}  // namespace poi::attr
