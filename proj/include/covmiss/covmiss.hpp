#pragma once

// Covariance estimation from incompletely observed data: generalized
// moments over co-observed pairs, bandable and sparse regularizers, the
// observation-probability baseline, synthetic models, tuning, and losses.

#include <covmiss/banding.hpp>
#include <covmiss/bullet.hpp>
#include <covmiss/cov_estimate.hpp>
#include <covmiss/cross_validation.hpp>
#include <covmiss/csv_io.hpp>
#include <covmiss/errors.hpp>
#include <covmiss/losses.hpp>
#include <covmiss/masked_matrix.hpp>
#include <covmiss/matrix_num.hpp>
#include <covmiss/models.hpp>
#include <covmiss/moments.hpp>
#include <covmiss/pipeline.hpp>
#include <covmiss/simulate.hpp>
#include <covmiss/thresholding.hpp>
