#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace amdim {

struct EstimateWithError {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

/// Standard error of the mean of `batch_means` (sample sd / √k); 0 for k < 2.
inline double batch_standard_error(const std::vector<double>& batch_means) {
    const std::size_t k = batch_means.size();
    if (k < 2) return 0.0;
    double mean = 0.0;
    for (double m : batch_means) mean += m;
    mean /= static_cast<double>(k);
    double ss = 0.0;
    for (double m : batch_means) ss += (m - mean) * (m - mean);
    return std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
}

/// Batch-means accumulator for an autocorrelated series of known length:
/// `batches` equal consecutive batches, the last one absorbing the remainder.
class BatchMeans {
public:
    static constexpr std::uint64_t kDefaultBatches = 100;

    explicit BatchMeans(std::uint64_t total_samples, std::uint64_t batches = kDefaultBatches)
        : batch_size_(total_samples >= batches ? total_samples / batches : 1),
          batches_(total_samples >= batches ? batches : (total_samples > 0 ? total_samples : 1)) {
        means_.reserve(batches_);
    }

    void add(double x) noexcept {
        batch_sum_ += x;
        ++in_batch_;
        if (in_batch_ == batch_size_ && means_.size() + 1 < batches_) close_batch();
    }

    EstimateWithError finish() {
        if (in_batch_ > 0) close_batch();
        EstimateWithError out;
        out.n = count_;
        out.value = count_ > 0 ? total_sum_ / static_cast<double>(count_) : 0.0;
        out.std_error = batch_standard_error(means_);
        return out;
    }

    const std::vector<double>& batch_means() const noexcept { return means_; }

private:
    void close_batch() {
        means_.push_back(batch_sum_ / static_cast<double>(in_batch_));
        total_sum_ += batch_sum_;
        count_ += in_batch_;
        batch_sum_ = 0.0;
        in_batch_ = 0;
    }

    std::uint64_t batch_size_;
    std::uint64_t batches_;
    std::vector<double> means_;
    double batch_sum_ = 0.0;
    std::uint64_t in_batch_ = 0;
    double total_sum_ = 0.0;
    std::uint64_t count_ = 0;
};

}  // namespace amdim
