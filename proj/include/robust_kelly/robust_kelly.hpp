// Copyright 2026 The robust_kelly Authors
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


/// \file robust_kelly.hpp
/// \brief Umbrella header.

#pragma once

#include "robust_kelly/ambiguity.hpp"
#include "robust_kelly/core.hpp"
#include "robust_kelly/divergence.hpp"
#include "robust_kelly/duals.hpp"
#include "robust_kelly/horserace.hpp"
#include "robust_kelly/io.hpp"
#include "robust_kelly/lp.hpp"
#include "robust_kelly/oracle.hpp"
#include "robust_kelly/solver.hpp"
