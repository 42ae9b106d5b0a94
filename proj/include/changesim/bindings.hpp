#pragma once

#include <string>

namespace changesim {

// Names the three variable roles every analysis needs.
struct Bindings {
  std::string exposure;
  std::string baseline;
  std::string followup;

  bool operator==(const Bindings&) const = default;
};

}  // namespace changesim
