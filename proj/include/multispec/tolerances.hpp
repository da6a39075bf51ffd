#pragma once

/**
 * @file tolerances.hpp
 * @brief Numeric thresholds shared by the numeric modules.
 */

namespace multispec {

struct Tolerances {
    double newton = 1e-12;       ///< relative residual of F^p(z) - z
    double parab = 1e-6;         ///< min |lambda - 1| before the tracker substeps
    double parab_abort = 1e-10;  ///< min |lambda - 1| that aborts tracking
    double det = 1e-8;           ///< |det| / prod(row norms) for witness blocks
    double rank = 1e-7;          ///< smin / smax for rank certificates
    double fd_step = 1e-5;       ///< central-difference step in the parameter t
    double eval = 1e-9;          ///< "nonzero" threshold for exact-value polynomial evaluation
};

} // namespace multispec
