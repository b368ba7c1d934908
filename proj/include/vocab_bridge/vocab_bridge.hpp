// Copyright 2026 The vocab-bridge Authors
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

#include "vocab_bridge/alignment.hpp"
#include "vocab_bridge/dictionary.hpp"
#include "vocab_bridge/embedding_store.hpp"
#include "vocab_bridge/error.hpp"
#include "vocab_bridge/expansion.hpp"
#include "vocab_bridge/mixture.hpp"
#include "vocab_bridge/oov_metrics.hpp"
#include "vocab_bridge/subword_tokenizer.hpp"
#include "vocab_bridge/text_io.hpp"
