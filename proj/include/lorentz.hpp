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

// Umbrella header.

#include "lorentz/billiard.hpp"
#include "lorentz/config.hpp"
#include "lorentz/constants.hpp"
#include "lorentz/ensemble.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/flight.hpp"
#include "lorentz/kernel2d.hpp"
#include "lorentz/output.hpp"
#include "lorentz/report.hpp"
#include "lorentz/rng.hpp"
#include "lorentz/scattering.hpp"
#include "lorentz/spectral.hpp"
#include "lorentz/special.hpp"
#include "lorentz/stats.hpp"
#include "lorentz/vec.hpp"
