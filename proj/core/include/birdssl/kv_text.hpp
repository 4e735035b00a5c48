// Copyright 2026 The birdssl Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Flat `key=value` text used by run configs, checkpoint headers and result
// files. Keys are dotted namespaces (train.learning_rate). Lines starting
// with '#' and blank lines are ignored.

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace birdssl {

using KeyValues = std::map<std::string, std::string, std::less<>>;

/// Throws kParse (with line number) on a line without '=' or a repeated key.
KeyValues parse_key_values(std::string_view text, std::string_view source = "<text>");
/// One `key=value` line per entry, sorted by key.
std::string format_key_values(const KeyValues& kv);

int parse_int(std::string_view key, std::string_view value);
double parse_double(std::string_view key, std::string_view value);
bool parse_bool(std::string_view key, std::string_view value);
std::vector<int> parse_int_list(std::string_view key, std::string_view value);
std::string format_double(double value);

}  // namespace birdssl
