#pragma once

#include <string>
#include <string_view>

#include "mla/game.hpp"

namespace mla {

/// Parses the JSON game file format and validates the result.
/// Throws ParseError on malformed input, ValidationError on a bad model.
GameGraph parse_game(std::string_view text);

/// Canonical serialization: parse(serialize(g)) reproduces g, and
/// serialize(parse(t)) == t for files produced by serialize_game.
std::string serialize_game(const GameGraph& g);

GameGraph load_game(const std::string& path);
void save_game(const GameGraph& g, const std::string& path);

} // namespace mla
