#include "scmcf/state.hpp"

namespace scmcf {

const std::vector<double>& FlowState::concentration() const {
  return std::visit([](const auto& g) -> const std::vector<double>& { return g.concentration; }, geometry);
}

std::vector<double>& FlowState::concentration() {
  return std::visit([](auto& g) -> std::vector<double>& { return g.concentration; }, geometry);
}

}  // namespace scmcf
