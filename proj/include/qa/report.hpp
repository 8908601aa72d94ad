#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "qa/eval.hpp"

namespace qa::report {

enum class Format { kJson, kCsv, kMarkdown };

/// "json", "csv" or "markdown" (also "md"); anything else is a config error.
Format parse_format(std::string_view name);
std::string_view to_string(Format f);

std::string render(const eval::EvalReport& r, Format f);
std::string render(const eval::AblationTable& t, Format f);
std::string render(const eval::SweepResult& s, Format f);

template <typename T>
void emit_report(const std::string& path, const T& value, Format f);

eval::EvalReport eval_report_from_json(std::string_view text);
eval::AblationTable ablation_from_json(std::string_view text);
eval::SweepResult sweep_from_json(std::string_view text);
eval::SweepResult sweep_from_csv(std::string_view text);

/// Published accuracy for a dataset/system pair, when one exists. Datasets
/// are matched by name ("easy", "challenge"); systems are "ir-baseline",
/// "attentive-ranker", "random" or a discriminator subset such as "tfd+drd".
std::optional<double> reference_accuracy(std::string_view dataset, std::string_view system);

}  // namespace qa::report
