#pragma once

#include <filesystem>
#include <map>
#include <string>

namespace cloudfill::harness {

// flat `key = value` text; '#' starts a comment; blank lines ignored
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config_text(const std::string& text, const std::string& origin);
KeyValues parse_config_file(const std::filesystem::path& path);

}  // namespace cloudfill::harness
