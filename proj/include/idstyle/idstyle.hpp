// Copyright (C) 2026 The idstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "idstyle/config.hpp"
#include "idstyle/demo.hpp"
#include "idstyle/denoise.hpp"
#include "idstyle/error.hpp"
#include "idstyle/eval_manifest.hpp"
#include "idstyle/evalkit.hpp"
#include "idstyle/geometry.hpp"
#include "idstyle/guidance.hpp"
#include "idstyle/image.hpp"
#include "idstyle/imageio.hpp"
#include "idstyle/latent.hpp"
#include "idstyle/latentcodec.hpp"
#include "idstyle/mosaic.hpp"
#include "idstyle/pipeline.hpp"
#include "idstyle/sampler.hpp"
#include "idstyle/schedule.hpp"
#include "idstyle/sidecar.hpp"
#include "idstyle/tensor_file.hpp"
