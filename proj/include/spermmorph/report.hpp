#pragma once

#include <string>
#include <vector>

#include "spermmorph/morphometry.hpp"
#include "spermmorph/parsing_metrics.hpp"

namespace spermmorph {

struct ReportRow {
    std::string image;
    MorphReport report;
};

/// The 14 Table-2 value columns, after the instance column.
const std::vector<std::string>& table2_columns();

/// "instance,head_length,...,tail_angle_max" with two decimals, half-up, and
/// "NA" for absent values.
std::string table2_row(const MorphReport& r);

/// Header: image, instance, the Table-2 columns, flags.
std::string csv_header();
std::string csv_row(const ReportRow& row);
std::string to_csv(const std::vector<ReportRow>& rows);

/// Unrounded values; absent values are null.
std::string to_json(const std::vector<ReportRow>& rows);

/// Flags joined by ';'.
std::string join_flags(const MorphReport& r);

struct MetricRow {
    std::string image;
    MetricReport metrics;
};

std::string metrics_csv(const std::vector<MetricRow>& rows, const MetricReport& aggregate);
std::string metrics_json(const std::vector<MetricRow>& rows, const MetricReport& aggregate);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace spermmorph
