#pragma once

#include <string>

#include <json.hpp>

#include "dwass/metric.hpp"

namespace dwass {

/// Canonical JSON uses insertion-ordered objects so measure keys come out in
/// numeric label order (the storage order), not lexicographic order.
using OrderedJson = nlohmann::ordered_json;

inline OrderedJson mass_to_json(const Rational& mass) { return rational_to_string(mass); }
inline OrderedJson mass_to_json(double mass) { return mass; }

inline Rational mass_from_json(const nlohmann::json& value, const Rational*) {
  if (!value.is_string()) throw std::invalid_argument("rational mass must be a string");
  return parse_rational(value.get<std::string>());
}
inline double mass_from_json(const nlohmann::json& value, const double*) {
  if (value.is_string()) return rational_to_double(parse_rational(value.get<std::string>()));
  if (!value.is_number()) throw std::invalid_argument("float mass must be a number");
  return value.get<double>();
}

/// {"points": {"<label>": <mass>, ...}} with labels in numeric order.
template <class M>
OrderedJson measure_to_json(const SparseMeasure<M>& mu) {
  OrderedJson points = OrderedJson::object();
  for (const auto& [point, mass] : mu.entries()) {
    points[point_to_string(point)] = mass_to_json(mass);
  }
  return OrderedJson{{"points", std::move(points)}};
}

template <class M>
OrderedJson measure_to_json(const ProbabilityMeasure<M>& mu) {
  return measure_to_json(mu.measure());
}

template <class M>
SparseMeasure<M> measure_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("points") || !doc.at("points").is_object()) {
    throw std::invalid_argument("measure JSON must be an object with a \"points\" object");
  }
  typename SparseMeasure<M>::map_type entries;
  for (const auto& [key, value] : doc.at("points").items()) {
    entries.emplace(parse_point(key), mass_from_json(value, static_cast<const M*>(nullptr)));
  }
  return SparseMeasure<M>::from_entries(std::move(entries));
}

template <class M>
ProbabilityMeasure<M> probability_from_json(const nlohmann::json& doc) {
  return ProbabilityMeasure<M>(measure_from_json<M>(doc));
}

/// {"pairs": {"<x>,<y>": <mass>, ...}} in row-major numeric order.
template <class M>
OrderedJson coupling_to_json(const Coupling<M>& plan) {
  OrderedJson pairs = OrderedJson::object();
  for (const auto& [pair, mass] : plan.entries) {
    pairs[point_to_string(pair.first) + "," + point_to_string(pair.second)] = mass_to_json(mass);
  }
  return OrderedJson{{"pairs", std::move(pairs)}};
}

template <class M>
typename Coupling<M>::pair_map coupling_pairs_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("pairs") || !doc.at("pairs").is_object()) {
    throw std::invalid_argument("coupling JSON must be an object with a \"pairs\" object");
  }
  typename Coupling<M>::pair_map entries;
  for (const auto& [key, value] : doc.at("pairs").items()) {
    const auto comma = key.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("pair key must be \"x,y\"");
    entries.emplace(std::make_pair(parse_point(key.substr(0, comma)), parse_point(key.substr(comma + 1))),
                    mass_from_json(value, static_cast<const M*>(nullptr)));
  }
  return entries;
}

inline OrderedJson window_to_json(const std::vector<PointId>& window) {
  OrderedJson out = OrderedJson::array();
  for (const auto& x : window) out.push_back(point_to_string(x));
  return out;
}

}  // namespace dwass
