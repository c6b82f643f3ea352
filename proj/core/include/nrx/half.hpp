// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace nrx {

/// IEEE 754 binary16 conversion, round to nearest even. Overflow saturates to
/// infinity; NaN payloads collapse to a quiet NaN.
std::uint16_t float_to_half(float value) noexcept;
float half_to_float(std::uint16_t bits) noexcept;

}  // namespace nrx
