#include "ctrp/mixed_frequency.hpp"

#include <algorithm>
#include <cctype>

#include "ctrp/errors.hpp"
#include "ctrp/io.hpp"

namespace ctrp {

namespace {

bool valid_month(const std::string& m) {
    return m.size() == 7 && m[4] == '-' && std::isdigit(static_cast<unsigned char>(m[0])) &&
           std::isdigit(static_cast<unsigned char>(m[1])) && std::isdigit(static_cast<unsigned char>(m[2])) &&
           std::isdigit(static_cast<unsigned char>(m[3])) && std::isdigit(static_cast<unsigned char>(m[5])) &&
           std::isdigit(static_cast<unsigned char>(m[6]));
}

std::string month_of(const std::string& iso_date) {
    if (iso_date.size() < 7 || !valid_month(iso_date.substr(0, 7)))
        throw config_error("mixed frequency: malformed ISO date '" + iso_date + "'");
    return iso_date.substr(0, 7);
}

}  // namespace

void MixedFrequencyFrame::validate() const {
    for (std::size_t i = 1; i < monthly.size(); ++i)
        if (!(monthly[i - 1].month < monthly[i].month))
            throw config_error("mixed frequency: monthly rows must be strictly ascending");
    for (std::size_t i = 1; i < daily.size(); ++i)
        if (!(daily[i - 1].date < daily[i].date))
            throw config_error("mixed frequency: daily rows must be strictly ascending");
    for (const auto& row : monthly)
        if (!valid_month(row.month)) throw config_error("mixed frequency: malformed month '" + row.month + "'");
    for (const auto& row : daily) month_of(row.date);
}

MixedFrequencyFrame load_mixed_frequency(const std::string& monthly_csv_path,
                                         const std::string& daily_csv_path) {
    MixedFrequencyFrame frame;

    const auto monthly = read_csv(monthly_csv_path);
    if (monthly.empty() || monthly.front().size() != 2 || monthly.front()[0] != "date" ||
        monthly.front()[1] != "value")
        throw config_error("mixed frequency: monthly header must be date,value");
    for (std::size_t r = 1; r < monthly.size(); ++r)
        frame.monthly.push_back({month_of(monthly[r][0]), std::stod(monthly[r][1])});

    const auto daily = read_csv(daily_csv_path);
    if (daily.empty() || daily.front().size() != 1 + MixedFrequencyFrame::kSeries ||
        daily.front()[0] != "date")
        throw config_error("mixed frequency: daily header must be date plus the seven series");
    for (int s = 0; s < MixedFrequencyFrame::kSeries; ++s)
        if (daily.front()[static_cast<std::size_t>(s + 1)] != MixedFrequencyFrame::kSeriesNames[static_cast<std::size_t>(s)])
            throw config_error(std::string("mixed frequency: daily column ") + std::to_string(s + 2) +
                               " must be " + MixedFrequencyFrame::kSeriesNames[static_cast<std::size_t>(s)]);
    for (std::size_t r = 1; r < daily.size(); ++r) {
        MixedFrequencyFrame::DailyRow row;
        row.date = daily[r][0];
        for (int s = 0; s < MixedFrequencyFrame::kSeries; ++s)
            row.values[static_cast<std::size_t>(s)] = std::stod(daily[r][static_cast<std::size_t>(s + 1)]);
        frame.daily.push_back(std::move(row));
    }
    frame.validate();
    return frame;
}

DenseTensor build_mixed_frequency_tensor(const MixedFrequencyFrame& frame, int month_index) {
    frame.validate();
    if (month_index < MixedFrequencyFrame::kLags || month_index >= frame.months())
        throw parameter_error("mixed frequency: month index lacks a full lag window");

    DenseTensor out({MixedFrequencyFrame::kLags, MixedFrequencyFrame::kSeries,
                     MixedFrequencyFrame::kDays});

    for (int lag = 1; lag <= MixedFrequencyFrame::kLags; ++lag) {
        const std::string& month = frame.monthly[static_cast<std::size_t>(month_index - lag)].month;
        std::vector<const MixedFrequencyFrame::DailyRow*> rows;
        for (const auto& d : frame.daily)
            if (month_of(d.date) == month) rows.push_back(&d);
        if (rows.empty())
            throw io_error("mixed frequency: no daily rows for month " + month +
                           " (lag " + std::to_string(lag) + " of month index " +
                           std::to_string(month_index) + ")");

        // Normalize to exactly kDays columns, oldest to newest.
        std::vector<const MixedFrequencyFrame::DailyRow*> days;
        if (static_cast<int>(rows.size()) >= MixedFrequencyFrame::kDays) {
            days.assign(rows.end() - MixedFrequencyFrame::kDays, rows.end());
        } else {
            const int pad = MixedFrequencyFrame::kDays - static_cast<int>(rows.size());
            days.assign(static_cast<std::size_t>(pad), rows.front());
            days.insert(days.end(), rows.begin(), rows.end());
        }

        for (int s = 0; s < MixedFrequencyFrame::kSeries; ++s) {
            for (int day = 0; day < MixedFrequencyFrame::kDays; ++day) {
                const int idx[3] = {lag - 1, s, day};
                out.at(idx) = days[static_cast<std::size_t>(day)]->values[static_cast<std::size_t>(s)];
            }
        }
    }
    return out;
}

MixedFrequencyDataset build_mixed_frequency_dataset(const MixedFrequencyFrame& frame) {
    frame.validate();
    MixedFrequencyDataset out;
    std::vector<double> y;
    for (int t = MixedFrequencyFrame::kLags; t < frame.months(); ++t) {
        out.x.push_back(build_mixed_frequency_tensor(frame, t));
        y.push_back(frame.monthly[static_cast<std::size_t>(t)].value);
        out.months.push_back(frame.monthly[static_cast<std::size_t>(t)].month);
    }
    out.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    return out;
}

}  // namespace ctrp
