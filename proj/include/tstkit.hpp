// Copyright 2026 The tstkit Authors. All Rights Reserved.
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
// =============================================================================

#ifndef TSTKIT_TSTKIT_HPP
#define TSTKIT_TSTKIT_HPP

#include "tstkit/common.hpp"
#include "tstkit/conllu.hpp"
#include "tstkit/corpus.hpp"
#include "tstkit/decoder.hpp"
#include "tstkit/embedder.hpp"
#include "tstkit/eval.hpp"
#include "tstkit/graph_embed.hpp"
#include "tstkit/http_clients.hpp"
#include "tstkit/neg_sampler.hpp"
#include "tstkit/pipeline.hpp"
#include "tstkit/prompt_forge.hpp"
#include "tstkit/sampler.hpp"
#include "tstkit/toy_lm.hpp"
#include "tstkit/tuner.hpp"

#endif  // TSTKIT_TSTKIT_HPP
