#pragma once

// Umbrella header; llm_client.hpp is excluded so plain users do not pay for
// the HTTP stack. Include it directly when the endpoint path is needed.

#include "robustens/assignor.hpp"
#include "robustens/attacks.hpp"
#include "robustens/attention.hpp"
#include "robustens/checkpoint.hpp"
#include "robustens/common.hpp"
#include "robustens/dataset.hpp"
#include "robustens/detectors.hpp"
#include "robustens/evaluation.hpp"
#include "robustens/lexicon.hpp"
#include "robustens/matrix.hpp"
#include "robustens/paraphrase.hpp"
#include "robustens/prior.hpp"
#include "robustens/run_config.hpp"
#include "robustens/text.hpp"
#include "robustens/training.hpp"
