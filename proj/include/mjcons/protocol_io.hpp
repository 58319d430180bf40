#pragma once

#include "mjcons/synthesis.hpp"

#include <string>
#include <variant>

namespace mjcons::io {

using ProtocolVariant = std::variant<synth::FullOrderProtocol, synth::ReducedOrderProtocol>;

// Plain-text protocol document: "key = value" scalar lines plus
// "matrix NAME ROWS COLS" blocks in the whitespace matrix format. Decimal
// text uses 17 significant digits, so a save/load round trip is bit-exact.
void save_protocol(const std::string& path, const ProtocolVariant& proto);
ProtocolVariant load_protocol(const std::string& path);

}  // namespace mjcons::io
