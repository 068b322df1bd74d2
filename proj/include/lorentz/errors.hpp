// Copyright 2026 The lorentz-bg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace lorentz {

/// Requested work exceeds a configured memory or size cap.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A position or collision point is inconsistent with the scatterer geometry.
struct geometry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Iterative method failed to converge.
struct convergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Estimator input too small or degenerate.
struct degenerate_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid or unknown experiment configuration.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace lorentz
