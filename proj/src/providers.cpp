#include "rap/providers.hpp"

#include "rap/error.hpp"

namespace rap {

void ProviderConfig::validate() const {
    if (timeout_ms <= 0) {
        throw InvalidConfigError("timeout must be positive");
    }
    if (max_retries < 0 || max_retries > 5) {
        throw InvalidConfigError("max_retries must be in [0, 5]");
    }
    if (retry_backoff_ms < 0) {
        throw InvalidConfigError("retry backoff must be non-negative");
    }
    if (max_in_flight < 1) {
        throw InvalidConfigError("max_in_flight must be at least 1");
    }
}

std::string confidence_prompt(const std::string& query) {
    return "Question: " + query +
           ". Could you answer the question based on the available visual information? "
           "Answer Yes or No.";
}

} // namespace rap
