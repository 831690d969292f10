// SPDX-License-Identifier: Apache-2.0
//
// metamatch: programmable media-matching metasurface simulator
// Copyright (C) 2026 The metamatch authors
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

#ifndef METAMATCH_METAMATCH_HPP
#define METAMATCH_METAMATCH_HPP

#include "metamatch/cascade.hpp"
#include "metamatch/channel.hpp"
#include "metamatch/controller.hpp"
#include "metamatch/errors.hpp"
#include "metamatch/matcher.hpp"
#include "metamatch/media.hpp"
#include "metamatch/surface.hpp"

#endif  // METAMATCH_METAMATCH_HPP
