#pragma once

#include "rvw/error.hpp"
#include "rvw/image.hpp"
#include "rvw/image_io.hpp"
#include "rvw/spectral_graph.hpp"
#include "rvw/range_coder.hpp"
#include "rvw/contour.hpp"
#include "rvw/transform.hpp"
#include "rvw/intra.hpp"
#include "rvw/entropy.hpp"
#include "rvw/rgft_codec.hpp"
#include "rvw/visible_watermark.hpp"
#include "rvw/rdh_histogram.hpp"
#include "rvw/metrics.hpp"
#include "rvw/pipeline.hpp"
#include "rvw/synthetic.hpp"
