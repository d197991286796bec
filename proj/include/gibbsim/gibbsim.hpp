#pragma once

#include "gibbsim/acquisition.hpp"
#include "gibbsim/core/error.hpp"
#include "gibbsim/core/fft.hpp"
#include "gibbsim/core/image.hpp"
#include "gibbsim/core/ops.hpp"
#include "gibbsim/core/parallel.hpp"
#include "gibbsim/io/dataset.hpp"
#include "gibbsim/io/image_codec.hpp"
#include "gibbsim/io/processor.hpp"
#include "gibbsim/io/tensor_file.hpp"
#include "gibbsim/metrics/fwhm.hpp"
#include "gibbsim/metrics/logistic_fit.hpp"
#include "gibbsim/metrics/rician.hpp"
#include "gibbsim/metrics/spectral.hpp"
#include "gibbsim/pf_fraction.hpp"
#include "gibbsim/pf_recon.hpp"
#include "gibbsim/phantom_lab.hpp"
#include "gibbsim/phase_field.hpp"
#include "gibbsim/processor.hpp"
#include "gibbsim/random.hpp"
