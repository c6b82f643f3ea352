// Copyright 2026 The nrx Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "nrx/tensor.hpp"

namespace nrx {

/// Mean binary cross-entropy between bit targets B in {0,1} and logits L,
///   mean( -[B log sigma(L) + (1 - B) log(1 - sigma(L))] ),
/// evaluated as softplus(L) - B*L so it stays finite for any finite L.
/// With a mask, only positions with mask != 0 are averaged. Positive logits
/// favor bit 1.
double bce_with_logits(const Tensor& targets, const Tensor& logits);
double bce_with_logits(const Tensor& targets, const Tensor& logits, const Tensor& mask);

/// d(mean BCE)/dL = (sigma(L) - B) / count on masked positions, 0 elsewhere.
Tensor bce_with_logits_grad(const Tensor& targets, const Tensor& logits, const Tensor& mask);

}  // namespace nrx
