/* Copyright 2026 The Fogcast Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef FOGCAST_FOGCAST_HPP
#define FOGCAST_FOGCAST_HPP

#include "fogcast/binio.hpp"
#include "fogcast/catalog.hpp"
#include "fogcast/common.hpp"
#include "fogcast/csv.hpp"
#include "fogcast/dataset.hpp"
#include "fogcast/ensemble.hpp"
#include "fogcast/featurize.hpp"
#include "fogcast/gbdt.hpp"
#include "fogcast/geo.hpp"
#include "fogcast/idw.hpp"
#include "fogcast/ingest.hpp"
#include "fogcast/objectives.hpp"
#include "fogcast/rng.hpp"
#include "fogcast/stats.hpp"
#include "fogcast/synth.hpp"
#include "fogcast/time.hpp"
#include "fogcast/tlca.hpp"
#include "fogcast/verify.hpp"

#endif  // FOGCAST_FOGCAST_HPP
