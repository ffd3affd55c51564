#pragma once

#define QABOM_VERSION "0.1.0"

namespace qabom {
inline const char* version() { return QABOM_VERSION; }
}  // namespace qabom
