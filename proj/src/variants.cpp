#include "logicmix/variants.hpp"

namespace logicmix {

std::string to_string(VariantKind kind) {
  switch (kind) {
    case VariantKind::MixupAN: return "mixup-an";
    case VariantKind::WangAN: return "wang";
    case VariantKind::MLMixupAN: return "ml-mixup";
    case VariantKind::MixupPME: return "pme";
    case VariantKind::LogicMix: return "logicmix";
    case VariantKind::NoAugment: return "none";
  }
  return "unknown";
}

std::optional<VariantKind> variant_from_string(const std::string& name) {
  if (name == "mixup-an") return VariantKind::MixupAN;
  if (name == "wang") return VariantKind::WangAN;
  if (name == "ml-mixup") return VariantKind::MLMixupAN;
  if (name == "pme") return VariantKind::MixupPME;
  if (name == "logicmix") return VariantKind::LogicMix;
  if (name == "none") return VariantKind::NoAugment;
  return std::nullopt;
}

}  // namespace logicmix
