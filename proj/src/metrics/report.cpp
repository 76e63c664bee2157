#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "jpr/metrics/metrics.hpp"

namespace jpr::metrics {

using nlohmann::json;

EvalReport evaluate(std::span<const ImageU8> references, std::span<const ImageU8> tests,
                    std::span<const std::string> ids, std::string label, int quality,
                    std::string checkpoint_id) {
  if (references.size() != tests.size() || references.size() != ids.size())
    throw PreconditionError("evaluate: references, tests and ids must have equal length");
  EvalReport report;
  report.label = std::move(label);
  report.quality = quality;
  report.checkpoint_id = std::move(checkpoint_id);
  report.per_image.reserve(references.size());
  for (std::size_t i = 0; i < references.size(); ++i)
    report.per_image.push_back({ids[i], psnr(references[i], tests[i]),
                                ssim(references[i], tests[i]), vif(references[i], tests[i])});
  aggregate(report);
  return report;
}

void aggregate(EvalReport& report) {
  EvalRow mean{"mean", 0.0, 0.0, 0.0};
  const double n = static_cast<double>(report.per_image.size());
  if (n > 0) {
    for (const auto& r : report.per_image) {
      mean.psnr += r.psnr;
      mean.ssim += r.ssim;
      mean.vif += r.vif;
    }
    mean.psnr /= n;
    mean.ssim /= n;
    mean.vif /= n;
  }
  report.aggregate = mean;
}

std::string format_table(std::span<const EvalReport> columns) {
  std::ostringstream out;
  char buf[64];
  auto cell = [&](const std::string& s) {
    std::snprintf(buf, sizeof buf, " %-14s|", s.c_str());
    out << buf;
  };
  auto number = [&](double v, int precision) {
    std::snprintf(buf, sizeof buf, " %14.*f|", precision, v);
    out << buf;
  };
  out << "|";
  cell("Metrics");
  for (const auto& c : columns) cell(c.label.empty() ? "-" : c.label);
  out << "\n|";
  for (std::size_t i = 0; i <= columns.size(); ++i) out << "---------------|";
  out << "\n";
  const struct {
    const char* name;
    double EvalRow::*field;
  } rows[] = {{"PSNR", &EvalRow::psnr}, {"SSIM", &EvalRow::ssim}, {"VIF", &EvalRow::vif}};
  for (const auto& row : rows) {
    out << "|";
    cell(row.name);
    for (const auto& c : columns) number(c.aggregate.*row.field, 3);
    out << "\n";
  }
  return out.str();
}

std::string to_jsonl(const EvalReport& report) {
  std::string out;
  out += json{{"type", "header"},
              {"label", report.label},
              {"quality", report.quality},
              {"checkpoint", report.checkpoint_id},
              {"count", report.per_image.size()}}
             .dump();
  out += '\n';
  for (const auto& r : report.per_image) {
    out += json{{"type", "image"}, {"source_id", r.source_id}, {"psnr", r.psnr}, {"ssim", r.ssim}, {"vif", r.vif}}
               .dump();
    out += '\n';
  }
  const auto& a = report.aggregate;
  out += json{{"type", "aggregate"}, {"psnr", a.psnr}, {"ssim", a.ssim}, {"vif", a.vif}}.dump();
  out += '\n';
  return out;
}

EvalReport parse_jsonl(const std::string& text) {
  EvalReport report;
  std::istringstream in(text);
  std::string line;
  bool header = false, agg = false;
  std::size_t lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "header") {
        report.label = j.at("label").get<std::string>();
        report.quality = j.at("quality").get<int>();
        report.checkpoint_id = j.at("checkpoint").get<std::string>();
        header = true;
      } else if (type == "image") {
        report.per_image.push_back({j.at("source_id").get<std::string>(), j.at("psnr").get<double>(),
                                    j.at("ssim").get<double>(), j.at("vif").get<double>()});
      } else if (type == "aggregate") {
        report.aggregate = {"mean", j.at("psnr").get<double>(), j.at("ssim").get<double>(),
                            j.at("vif").get<double>()};
        agg = true;
      } else {
        throw ParseError("unknown record type '" + type + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError("eval report line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!header || !agg) throw ParseError("eval report is missing its header or aggregate record");
  return report;
}

}  // namespace jpr::metrics
