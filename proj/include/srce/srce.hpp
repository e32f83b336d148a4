#pragma once

#include "srce/binary_io.hpp"
#include "srce/config.hpp"
#include "srce/dataset/dataset_file.hpp"
#include "srce/dataset/generate.hpp"
#include "srce/dataset/normalization.hpp"
#include "srce/dataset/planes.hpp"
#include "srce/error.hpp"
#include "srce/estimators/estimators.hpp"
#include "srce/estimators/spline.hpp"
#include "srce/harness/evaluate.hpp"
#include "srce/harness/report.hpp"
#include "srce/harness/sweep.hpp"
#include "srce/harness/train.hpp"
#include "srce/harness/workspace.hpp"
#include "srce/models/architecture.hpp"
#include "srce/nn/activation.hpp"
#include "srce/nn/adam.hpp"
#include "srce/nn/checkpoint.hpp"
#include "srce/nn/conv.hpp"
#include "srce/nn/init.hpp"
#include "srce/nn/loss.hpp"
#include "srce/nn/model.hpp"
#include "srce/nn/tensor.hpp"
#include "srce/ofdm/channel.hpp"
#include "srce/ofdm/constellation.hpp"
#include "srce/ofdm/frame.hpp"
#include "srce/random.hpp"
#include "srce/snr.hpp"
