#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "corrprobe/backend.hpp"

namespace corrprobe::backend {

/// $CORRPROBE_DATA_DIR, else the data directory of the source tree.
std::filesystem::path data_dir();

/// Opens "http://host:port", "offline:FILE", "toy" (bundled model) or
/// "toy:FILE". Files read are appended to `inputs` when given.
std::shared_ptr<Backend> open_backend(const std::string& spec, const std::string& mask_token = std::string(kDefaultMask),
                                      std::vector<std::filesystem::path>* inputs = nullptr);

}  // namespace corrprobe::backend
