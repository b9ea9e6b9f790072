#pragma once

// Umbrella header for the semantic disentanglement toolkit.

#include "sdp/calibrate.hpp"
#include "sdp/core.hpp"
#include "sdp/embed.hpp"
#include "sdp/error.hpp"
#include "sdp/feedback.hpp"
#include "sdp/io.hpp"
#include "sdp/knowledge_object.hpp"
#include "sdp/metrics.hpp"
#include "sdp/pipeline.hpp"
#include "sdp/report.hpp"
#include "sdp/segment.hpp"
#include "sdp/store.hpp"
#include "sdp/synthgen.hpp"
#include "sdp/util.hpp"
