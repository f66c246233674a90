#pragma once

#include "sarcnn/backprojection.hpp"
#include "sarcnn/cnn/trainer.hpp"
#include "sarcnn/dataset.hpp"
#include "sarcnn/datasets.hpp"
#include "sarcnn/error.hpp"
#include "sarcnn/forward_model.hpp"
#include "sarcnn/harness.hpp"
#include "sarcnn/pgm.hpp"
#include "sarcnn/sard.hpp"
#include "sarcnn/scene.hpp"
