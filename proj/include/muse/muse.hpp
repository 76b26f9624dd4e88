// Copyright 2026 The muse-embed Authors.
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

#include "muse/benchmark.hpp"
#include "muse/common.hpp"
#include "muse/config.hpp"
#include "muse/corpus.hpp"
#include "muse/evaluation.hpp"
#include "muse/model_io.hpp"
#include "muse/params.hpp"
#include "muse/pseudoword.hpp"
#include "muse/representation.hpp"
#include "muse/selection.hpp"
#include "muse/trainer.hpp"
#include "muse/unigram_table.hpp"
#include "muse/vocabulary.hpp"
