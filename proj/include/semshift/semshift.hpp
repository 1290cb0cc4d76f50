#pragma once

#include "semshift/alignment.hpp"
#include "semshift/analysis.hpp"
#include "semshift/clustering.hpp"
#include "semshift/embedding_store.hpp"
#include "semshift/error.hpp"
#include "semshift/sgns.hpp"
#include "semshift/stability.hpp"
#include "semshift/text_pipeline.hpp"
