// Copyright 2026 The simkb Authors.
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

#include "simkb/common.hpp"
#include "simkb/component_extract.hpp"
#include "simkb/cotrain.hpp"
#include "simkb/eval_stats.hpp"
#include "simkb/inference.hpp"
#include "simkb/kb_store.hpp"
#include "simkb/pattern_extract.hpp"
#include "simkb/pipeline.hpp"
#include "simkb/property_scoring.hpp"
#include "simkb/text_classifier.hpp"
#include "simkb/treebank.hpp"
