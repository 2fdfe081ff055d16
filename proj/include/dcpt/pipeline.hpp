#pragma once
#include <optional>

#include <dcpt/core/types.hpp>
#include <dcpt/select/projection.hpp>
#include <dcpt/solver/path.hpp>
#include <dcpt/solver/weights.hpp>

namespace dcpt {

struct DetectOptions
{
    int order = 1;
    /// Defaults to one group per predictor series.
    std::optional<GroupSpec> groups;
    SelectOptions select;
    PathOptions path;
};

struct Detection
{
    SolutionPath path;
    ChangepointReport report;
};

/// Weights, solution path and count selection for a fitted posterior.
/// Static covariates in the dataset are carried into the loss.
inline Detection detect(const PosteriorDraws& draws, const Dataset& data, const DetectOptions& opt = {})
{
    draws.check();
    if (draws.n() != data.n() || draws.p() != data.p()) throw ValidationError("posterior does not match the dataset");
    if (opt.order != 1 && opt.order != 2) throw ValidationError("order must be 1 or 2");
    const GroupSpec groups = opt.groups ? *opt.groups : GroupSpec::singletons(static_cast<int>(data.p()));
    const auto w = compute_weights(draws);
    Detection d;
    d.path = data.l() > 0 && draws.l() == data.l() ? solve_with_covariates(draws, data, opt.order, groups, w, opt.path)
                                                   : fit_path(draws, data, opt.order, groups, w, opt.path);
    d.report = select_changepoints(d.path, draws, data, opt.select);
    return d;
}

} // namespace dcpt
