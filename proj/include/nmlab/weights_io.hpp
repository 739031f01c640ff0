#pragma once

#include "nmlab/tinynet.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace nmlab {

// Weight files:
//   {"arch": "sigmoid221", "params": {"w00":..,"w01":..,"b0":..,"w10":..,"w11":..,"b1":..,"v0":..,"v1":..,"c":..}}
//   {"arch": "relu_reg",   "params": {"w": [..], "b": [..], "v": [..], "c": ..}}
//   {"arch": "two_h1",     "params": {"activation": "relu"|"sigmoid", "w1": [[a, b], ..], "b1": [..], "v": [..], "c": ..}}
//   {"arch": "deep_relu",  "params": {"layers": [{"w": [[..], ..], "b": [..]}, ..]}}
// Any mismatch throws ParseError.

AnyParams parse_weights_json(std::string_view text);
std::string weights_to_json(const AnyParams& p);
AnyParams load_weights(const std::filesystem::path& path);
void save_weights(const AnyParams& p, const std::filesystem::path& path);

}  // namespace nmlab
