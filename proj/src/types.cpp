#include "rabm/types.hpp"

#include <cctype>
#include <string>

#include "rabm/error.hpp"

namespace rabm {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::unorganized: return "unorganized";
    case Channel::organized: return "organized";
    case Channel::epharm: return "epharm";
  }
  return "?";
}

std::string_view level_letter(Level l) {
  switch (l) {
    case Level::L1: return "L";
    case Level::L2: return "M";
    case Level::L3: return "H";
  }
  return "?";
}

Level parse_level(std::string_view text) {
  const std::string t = lower(text);
  if (t == "l" || t == "1" || t == "l1" || t == "low") return Level::L1;
  if (t == "m" || t == "2" || t == "l2" || t == "medium") return Level::L2;
  if (t == "h" || t == "3" || t == "l3" || t == "high") return Level::L3;
  throw ValidationError("unknown level '" + std::string(text) + "' (expected L/M/H or 1/2/3)");
}

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::price_discount: return "price_discount";
    case Attribute::quality: return "quality";
    case Attribute::assortment: return "assortment";
    case Attribute::service: return "service";
    case Attribute::distance: return "distance";
    case Attribute::emergency: return "emergency";
  }
  return "?";
}

Attribute parse_attribute(std::string_view text) {
  const std::string t = lower(text);
  if (t == "price_discount" || t == "p" || t == "discount") return Attribute::price_discount;
  if (t == "quality" || t == "v") return Attribute::quality;
  if (t == "assortment" || t == "a") return Attribute::assortment;
  if (t == "service" || t == "s") return Attribute::service;
  if (t == "distance" || t == "d") return Attribute::distance;
  if (t == "emergency" || t == "beta") return Attribute::emergency;
  throw ValidationError("unknown attribute '" + std::string(text) + "'");
}

std::string_view to_string(Emergency e) {
  switch (e) {
    case Emergency::low: return "LE";
    case Emergency::medium: return "ME";
    case Emergency::high: return "HE";
  }
  return "?";
}

Emergency parse_emergency(std::string_view text) {
  const std::string t = lower(text);
  if (t == "le" || t == "low") return Emergency::low;
  if (t == "me" || t == "medium") return Emergency::medium;
  if (t == "he" || t == "high") return Emergency::high;
  throw ValidationError("unknown emergency level '" + std::string(text) + "'");
}

}  // namespace rabm
