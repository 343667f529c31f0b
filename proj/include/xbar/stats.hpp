#ifndef XBAR_STATS_HPP
#define XBAR_STATS_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace xbar {

struct Estimate {
    double mean = 0;
    double ci95_halfwidth = 0;
    std::vector<double> batch_means;
};

inline double student_t_quantile(double p, double dof) {
    return boost::math::quantile(boost::math::students_t_distribution<double>(dof), p);
}

// 95% Student-t interval treating each batch mean as one sample.
inline Estimate estimate_from_batches(std::vector<double> batch_means) {
    Estimate est;
    const auto n = batch_means.size();
    if (n == 0)
        return est;
    double sum = 0;
    for (double b : batch_means)
        sum += b;
    est.mean = sum / static_cast<double>(n);
    if (n >= 2) {
        double ss = 0;
        for (double b : batch_means)
            ss += (b - est.mean) * (b - est.mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        est.ci95_halfwidth = student_t_quantile(0.975, static_cast<double>(n - 1)) * sd / std::sqrt(static_cast<double>(n));
    }
    est.batch_means = std::move(batch_means);
    return est;
}

// Streams samples into `batches` consecutive batches of `batch_size`;
// samples past the last full batch are dropped.
class BatchMeans {
public:
    BatchMeans(int batches, std::int64_t batch_size) : batches_(batches), batch_size_(batch_size) {
        if (batches < 1 || batch_size < 1)
            throw std::invalid_argument("BatchMeans: need at least one batch of one sample");
        means_.reserve(static_cast<std::size_t>(batches));
    }

    void add(double sample) {
        if (full())
            return;
        sum_ += sample;
        if (++count_ == batch_size_) {
            means_.push_back(sum_ / static_cast<double>(batch_size_));
            sum_ = 0;
            count_ = 0;
        }
    }

    bool full() const { return static_cast<int>(means_.size()) == batches_; }
    const std::vector<double> &means() const { return means_; }

private:
    int batches_;
    std::int64_t batch_size_;
    std::int64_t count_ = 0;
    double sum_ = 0;
    std::vector<double> means_;
};

} // namespace xbar

#endif // XBAR_STATS_HPP
