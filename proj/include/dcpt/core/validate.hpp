#pragma once
#include <memory>

#include <dcpt/core/types.hpp>

namespace dcpt {

/// Dataset and configuration that passed every invariant check together.
class ValidatedInput
{
public:
    const Dataset& data() const { return *data_; }
    const DlmConfig& config() const { return *config_; }

private:
    friend ValidatedInput validate(const Dataset&, const DlmConfig&);
    ValidatedInput(Dataset d, DlmConfig c)
        : data_(std::make_shared<const Dataset>(std::move(d))),
          config_(std::make_shared<const DlmConfig>(std::move(c)))
    {}

    std::shared_ptr<const Dataset> data_;
    std::shared_ptr<const DlmConfig> config_;
};

inline ValidatedInput validate(const Dataset& data, const DlmConfig& config)
{
    config.check();
    const auto min_n = 2 * config.order + 2;
    if (data.n() < min_n) {
        throw ValidationError("series too short: n=" + std::to_string(data.n()) +
                              " but order " + std::to_string(config.order) + " needs n >= " +
                              std::to_string(min_n));
    }
    if (data.p() < 1) throw ValidationError("at least one predictor column is required");
    return ValidatedInput(data, config);
}

} // namespace dcpt
