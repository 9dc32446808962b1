// SPDX-License-Identifier: Apache-2.0
//
// milac-sim: analog matrix computing and beamforming simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

/// @file milac.hpp
/// @brief Umbrella header for the simulation library (no JSON dependency).
#pragma once

#include "milac/beamforming.hpp"
#include "milac/complexity.hpp"
#include "milac/estimators.hpp"
#include "milac/linksim.hpp"
#include "milac/network.hpp"
#include "milac/numerics.hpp"
