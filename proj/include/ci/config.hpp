#pragma once

#include <string>

#include "ci/iteration.hpp"

namespace ci {

/// Flat `key = value` text, `#` starts a comment.  Unknown keys, repeated keys and
/// unparsable values throw ConfigError with the line number.
RunConfig parse_config(const std::string& text);
/// Throws ConfigError when the file cannot be read.
RunConfig load_config(const std::string& path);
/// Key reference with defaults, one line per key.
std::string config_reference();
/// Canonical text form; parse_config(config_text(c)) reproduces c.
std::string config_text(const RunConfig& c);

}  // namespace ci
