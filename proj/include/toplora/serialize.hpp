#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "toplora/adapter.hpp"
#include "toplora/matrix.hpp"

namespace toplora {

using NamedMatrices = std::vector<std::pair<std::string, Matrix>>;

// TPLW1 container: 5-byte magic "TPLW1", then per matrix: u16 LE name
// length, UTF-8 name, u32 LE rows, u32 LE cols, row-major f64 LE payload.
void write_weights(const std::string& path, const NamedMatrices& entries);
NamedMatrices read_weights(const std::string& path);

void save_adapter(const std::string& path, const LoRAAdapter& adapter);
void save_adapter(const std::string& path, const TopLoRAAdapter& adapter);

// Kind is detected by the presence of a "Theta" entry.
std::variant<LoRAAdapter, TopLoRAAdapter> load_adapter(const std::string& path);

}  // namespace toplora
