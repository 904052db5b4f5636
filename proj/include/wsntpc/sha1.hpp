// Minimal SHA-1 used to fingerprint configurations in output files.
#pragma once

#include <string>

namespace wsntpc {

// Hex digest (40 lowercase characters) of the given bytes.
std::string sha1_hex(const std::string& bytes);

}  // namespace wsntpc
