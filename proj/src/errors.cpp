#include "smoothfix/errors.hpp"
#include "smoothfix/estimate.hpp"

namespace smoothfix {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::degenerate_weights: return "DegenerateWeights";
        case Errc::subcritical_count: return "SubcriticalCount";
        case Errc::horizon_unbounded: return "HorizonUnbounded";
        case Errc::divergent: return "Divergent";
        case Errc::condition_d_violated: return "ConditionDViolated";
        case Errc::no_root: return "NoRoot";
        case Errc::evaluation_failed: return "EvaluationFailed";
        case Errc::grid_too_coarse: return "GridTooCoarse";
        case Errc::degenerate_at_zero: return "DegenerateAtZero";
        case Errc::quadrature_failure: return "QuadratureFailure";
        case Errc::mean_mismatch: return "MeanMismatch";
        case Errc::no_characteristic_function: return "NoCharacteristicFunction";
        case Errc::empty_pool: return "EmptyPool";
        case Errc::mean_collapse: return "MeanCollapse";
        case Errc::zero_mean: return "ZeroMean";
        case Errc::too_few_samples: return "TooFewSamples";
        case Errc::hypotheses_violated: return "HypothesesViolated";
        case Errc::mass_deficit: return "MassDeficit";
        case Errc::divergent_inverse_moment: return "DivergentInverseMoment";
        case Errc::degenerate_pair: return "DegeneratePair";
        case Errc::product_underflow: return "ProductUnderflow";
        case Errc::bad_input: return "BadInput";
    }
    return "UnknownError";
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::exact: return "exact";
        case Provenance::monte_carlo: return "monte-carlo";
        case Provenance::quadrature: return "quadrature";
    }
    return "unknown";
}

} // namespace smoothfix
