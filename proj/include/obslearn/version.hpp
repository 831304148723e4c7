#pragma once

namespace obslearn {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kPanelSchemaVersion = 1;

}  // namespace obslearn
