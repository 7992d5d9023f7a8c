#include "corrprobe/open_backend.hpp"

#include <cstdlib>

#include "corrprobe/error.hpp"
#include "corrprobe/http_backend.hpp"
#include "corrprobe/offline_backend.hpp"
#include "corrprobe/toy_model.hpp"

namespace corrprobe::backend {

std::filesystem::path data_dir() {
  if (const char* d = std::getenv("CORRPROBE_DATA_DIR"); d && *d) return d;
  return CORRPROBE_DEFAULT_DATA_DIR;
}

std::shared_ptr<Backend> open_backend(const std::string& spec, const std::string& mask_token,
                                      std::vector<std::filesystem::path>* inputs) {
  auto note = [&](const std::filesystem::path& p) {
    if (inputs) inputs->push_back(p);
  };
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    HttpOptions h;
    h.mask_token = mask_token;
    return std::make_shared<HttpBackend>(spec, h);
  }
  if (spec.rfind("offline:", 0) == 0) {
    const std::filesystem::path path = spec.substr(8);
    note(path);
    return OfflineBackend::load_file(path, mask_token);
  }
  if (spec == "toy" || spec.rfind("toy:", 0) == 0) {
    const std::filesystem::path path = spec == "toy" ? data_dir() / "toy_model.json" : std::filesystem::path(spec.substr(4));
    note(path);
    return std::make_shared<ToyModel>(load_toy_spec_file(path));
  }
  throw InputError("unrecognized backend '" + spec + "' (http://..., offline:FILE, toy:FILE)");
}

}  // namespace corrprobe::backend
