#ifndef PROMPTSTEAL_PROMPTSTEAL_HPP
#define PROMPTSTEAL_PROMPTSTEAL_HPP

// Umbrella header: pulls in the whole toolkit.

#include "promptsteal/backends.hpp"
#include "promptsteal/common.hpp"
#include "promptsteal/dataset.hpp"
#include "promptsteal/defenses.hpp"
#include "promptsteal/embedding.hpp"
#include "promptsteal/extraction.hpp"
#include "promptsteal/harness.hpp"
#include "promptsteal/image.hpp"
#include "promptsteal/matching.hpp"
#include "promptsteal/metrics.hpp"
#include "promptsteal/modifier.hpp"
#include "promptsteal/parser.hpp"
#include "promptsteal/prompt.hpp"
#include "promptsteal/rng.hpp"
#include "promptsteal/search.hpp"
#include "promptsteal/synthetic.hpp"

#endif  // PROMPTSTEAL_PROMPTSTEAL_HPP
