#pragma once

#include <string>
#include <string_view>

#include "dnmg/network.hpp"

namespace dnmg::net {

// Parses and validates a network document (JSON, see README for the schema).
// Throws SchemaError / ReferenceError / ConnectivityError.
Network load_network(std::string_view document);
Network load_network_file(const std::string& path);

}  // namespace dnmg::net
