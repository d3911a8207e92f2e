// Copyright 2026 the greensolve authors
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

// Shared lazily-built fixtures so the expensive matrix assemblies run
// at most once per test binary.

#pragma once

#include "greensolve/green_matrix.hpp"
#include "greensolve/quad_grid.hpp"

namespace fixtures {

// small grid for cheap structural checks
inline const greensolve::QuadGrid& small_grid() {
    static const greensolve::QuadGrid grid =
        greensolve::build_ball_grid(3, 8, 18);
    return grid;
}

// medium grid for solver and ladder checks
inline const greensolve::QuadGrid& mid_grid() {
    static const greensolve::QuadGrid grid =
        greensolve::build_ball_grid(3, 16, 32);
    return grid;
}

inline const greensolve::GreenKernel& classical() {
    static const greensolve::GreenKernel k = greensolve::GreenKernel::classical();
    return k;
}

inline const greensolve::GreenKernel& rfl_half() {
    static const greensolve::GreenKernel k = greensolve::GreenKernel::rfl(0.5);
    return k;
}

inline const greensolve::GreenMatrix& classical_small() {
    static const greensolve::GreenMatrix m =
        greensolve::assemble(classical(), small_grid());
    return m;
}

inline const greensolve::GreenMatrix& rfl_half_small() {
    static const greensolve::GreenMatrix m =
        greensolve::assemble(rfl_half(), small_grid());
    return m;
}

inline const greensolve::GreenMatrix& classical_mid() {
    static const greensolve::GreenMatrix m =
        greensolve::assemble(classical(), mid_grid());
    return m;
}

inline const greensolve::GreenMatrix& rfl_half_mid() {
    static const greensolve::GreenMatrix m =
        greensolve::assemble(rfl_half(), mid_grid());
    return m;
}

}  // namespace fixtures
