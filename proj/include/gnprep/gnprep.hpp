// Copyright 2026 The gnprep Authors
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

#include "gnprep/bessel.hpp"
#include "gnprep/circuit.hpp"
#include "gnprep/config.hpp"
#include "gnprep/core.hpp"
#include "gnprep/exact_engine.hpp"
#include "gnprep/jordan_wigner.hpp"
#include "gnprep/lattice_model.hpp"
#include "gnprep/mps.hpp"
#include "gnprep/operator_algebra.hpp"
#include "gnprep/pipeline.hpp"
#include "gnprep/rabi_floquet.hpp"
