#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "ctrp/tensor.hpp"

namespace ctrp {

/// Monthly response plus seven named daily covariate series, aligned into
/// (lags x series x days) covariate tensors of shape (4, 7, 22).
///
/// Normalization to exactly 22 trading days: months with more days keep the
/// last 22; shorter months are front-padded by repeating their earliest day.
struct MixedFrequencyFrame {
    static constexpr int kLags = 4;
    static constexpr int kSeries = 7;
    static constexpr int kDays = 22;
    static constexpr std::array<const char*, kSeries> kSeriesNames = {"GV", "BV", "ER", "IR",
                                                                      "VI", "TB", "BD"};

    struct MonthlyRow {
        std::string month;  // "YYYY-MM"
        double value = 0.0;
    };
    struct DailyRow {
        std::string date;  // ISO "YYYY-MM-DD"
        std::array<double, kSeries> values{};
    };

    std::vector<MonthlyRow> monthly;  // ascending by month
    std::vector<DailyRow> daily;      // ascending by date

    void validate() const;
    int months() const { return static_cast<int>(monthly.size()); }
};

/// Loads the two CSV tables. The monthly file has columns (date, value)
/// where date is a month or any day inside it; the daily file has columns
/// (date, GV, BV, ER, IR, VI, TB, BD), names and order exact. Dates are
/// ISO-8601 and missing values are rejected.
MixedFrequencyFrame load_mixed_frequency(const std::string& monthly_csv_path,
                                         const std::string& daily_csv_path);

/// Covariate tensor for month index t (0-based into the monthly series):
/// slice l of the first mode holds the (series x days) matrix of month
/// t-1-l, days ordered oldest to newest. Months t-4..t-1 must each have at
/// least one daily row; a missing month raises an error naming the gap.
DenseTensor build_mixed_frequency_tensor(const MixedFrequencyFrame& frame, int month_index);

struct MixedFrequencyDataset {
    std::vector<DenseTensor> x;
    Eigen::VectorXd y;
    std::vector<std::string> months;  // response month per row
};

/// All months with a full lag window, in chronological order.
MixedFrequencyDataset build_mixed_frequency_dataset(const MixedFrequencyFrame& frame);

}  // namespace ctrp
