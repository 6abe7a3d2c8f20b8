// Copyright 2026 The recwatch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "recwatch/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "recwatch/format.hpp"

namespace recwatch {

GroundTruth GroundTruth::Of(const Simulation& sim, const NodeSet& neighbors) {
  GroundTruth truth;
  for (NodeId v : neighbors) {
    (sim.policy(v).dishonest() ? truth.dishonest : truth.honest).push_back(v);
  }
  return truth;
}

double EmpiricalPfn(const NodeSet& suspicious, const GroundTruth& truth) {
  if (truth.dishonest.empty()) {
    throw std::invalid_argument(
        "false-negative rate is undefined without dishonest neighbors");
  }
  const std::size_t escaped =
      truth.dishonest.size() - IntersectionSize(truth.dishonest, suspicious);
  return static_cast<double>(escaped) /
         static_cast<double>(truth.dishonest.size());
}

double EmpiricalPfp(const NodeSet& suspicious, const GroundTruth& truth) {
  if (truth.honest.empty()) {
    throw std::invalid_argument(
        "false-positive rate is undefined without honest neighbors");
  }
  return static_cast<double>(IntersectionSize(truth.honest, suspicious)) /
         static_cast<double>(truth.honest.size());
}

std::vector<double> MarketShare(std::span<const PurchaseRecord> log,
                                std::size_t num_products) {
  if (log.empty()) throw std::invalid_argument("purchase log is empty");
  std::vector<double> share(num_products, 0.0);
  for (const auto& rec : log) {
    if (rec.product >= num_products) {
      throw std::out_of_range("purchase of unknown product");
    }
    share[rec.product] += 1.0;
  }
  for (double& s : share) s /= static_cast<double>(log.size());
  return share;
}

CurveSummary AggregateCurves(const std::vector<std::vector<double>>& curves) {
  if (curves.size() < 2) {
    throw std::invalid_argument("aggregation needs at least two replicates");
  }
  CurveSummary out;
  out.replicates = curves.size();
  std::size_t len = curves.front().size();
  for (const auto& c : curves) {
    if (c.size() != len) out.truncated = true;
    len = std::min(len, c.size());
  }
  out.mean.assign(len, 0.0);
  out.std_error.assign(len, 0.0);
  const double n = static_cast<double>(curves.size());
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    for (const auto& c : curves) sum += c[i];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& c : curves) ss += (c[i] - mean) * (c[i] - mean);
    out.mean[i] = mean;
    out.std_error[i] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::map<std::uint32_t, double> EmpiricalPmf(
    std::span<const std::uint32_t> samples) {
  std::map<std::uint32_t, double> pmf;
  for (std::uint32_t r : samples) pmf[r] += 1.0;
  for (auto& [r, v] : pmf) v /= static_cast<double>(samples.size());
  return pmf;
}

AggregateResult AggregateReplicates(std::span<const ExperimentResult> results) {
  if (results.size() < 2) {
    throw std::invalid_argument("aggregation needs at least two replicates");
  }
  auto collect = [&](auto member) {
    std::vector<std::vector<double>> curves;
    curves.reserve(results.size());
    for (const auto& r : results) curves.push_back(r.*member);
    return curves;
  };
  AggregateResult out;
  auto maybe = [&](auto member, CurveSummary& dst) {
    auto curves = collect(member);
    if (std::all_of(curves.begin(), curves.end(),
                    [](const auto& c) { return c.empty(); })) {
      dst.replicates = curves.size();
      return;
    }
    dst = AggregateCurves(curves);
  };
  maybe(&ExperimentResult::pfp_empirical, out.pfp_empirical);
  maybe(&ExperimentResult::pfn_empirical, out.pfn_empirical);
  maybe(&ExperimentResult::pfp_theoretic, out.pfp_theoretic);
  maybe(&ExperimentResult::pfn_theoretic, out.pfn_theoretic);
  maybe(&ExperimentResult::market_share, out.market_share);
  std::vector<std::uint32_t> rs;
  for (const auto& r : results) {
    if (r.rounds_to_clean) {
      rs.push_back(*r.rounds_to_clean);
    } else {
      ++out.r_censored;
    }
  }
  if (!rs.empty()) {
    out.r_pmf = EmpiricalPmf(rs);
    double sum = 0.0;
    for (auto r : rs) sum += r;
    out.r_mean = sum / static_cast<double>(rs.size());
  }
  return out;
}

namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 70, kRight = 150,
                 kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#ff7f0e", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f"};

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

void Frame(const std::string& title, const std::string& x_label,
           const std::string& y_label, double y_max, std::ostream& out) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << Escape(title) << "</text>\n";
  const double x0 = kLeft, y0 = kHeight - kBottom;
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\""
      << kWidth - kRight << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0
      << "\" y2=\"" << kTop << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y_max * i / 4.0;
    const double y = y0 - (y0 - kTop) * i / 4.0;
    out << "<text x=\"" << x0 - 6 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\">" << FormatDouble(v) << "</text>\n";
  }
  out << "<text x=\"" << (x0 + kWidth - kRight) / 2 << "\" y=\""
      << kHeight - 12 << "\" text-anchor=\"middle\">" << Escape(x_label)
      << "</text>\n";
  out << "<text x=\"16\" y=\"" << (kTop + y0) / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (kTop + y0) / 2 << ")\">" << Escape(y_label) << "</text>\n";
}

void Legend(const std::vector<ChartSeries>& series, std::ostream& out) {
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = kTop + 16.0 * static_cast<double>(s);
    out << "<rect x=\"" << kWidth - kRight + 10 << "\" y=\"" << y - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[s % 8]
        << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight + 24 << "\" y=\"" << y << "\">"
        << Escape(series[s].label) << "</text>\n";
  }
}

double MaxOf(const std::vector<ChartSeries>& series) {
  double m = 0.0;
  for (const auto& s : series) {
    for (double v : s.y) {
      if (std::isfinite(v)) m = std::max(m, v);
    }
  }
  return m > 0.0 ? m : 1.0;
}

}  // namespace

void WriteLineChartSvg(const std::string& title, const std::string& x_label,
                       const std::string& y_label,
                       const std::vector<double>& x,
                       const std::vector<ChartSeries>& series,
                       std::ostream& out) {
  const double y_max = MaxOf(series);
  Frame(title, x_label, y_label, y_max, out);
  double x_min = 0.0, x_max = 1.0;
  if (!x.empty()) {
    x_min = *std::min_element(x.begin(), x.end());
    x_max = *std::max_element(x.begin(), x.end());
    if (x_max == x_min) x_max = x_min + 1.0;
  }
  const double x0 = kLeft, y0 = kHeight - kBottom;
  const double w = kWidth - kRight - kLeft, h = y0 - kTop;
  for (int i = 0; i <= 4; ++i) {
    const double v = x_min + (x_max - x_min) * i / 4.0;
    out << "<text x=\"" << x0 + w * i / 4.0 << "\" y=\"" << y0 + 16
        << "\" text-anchor=\"middle\">" << FormatDouble(v) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    // Non-finite values break the line into separate segments.
    const std::size_t n = std::min(x.size(), series[s].y.size());
    bool open = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(series[s].y[i])) {
        if (open) out << "\"/>\n";
        open = false;
        continue;
      }
      if (!open) {
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[s % 8]
            << "\" stroke-width=\"1.5\" points=\"";
        open = true;
      }
      const double px = x0 + w * (x[i] - x_min) / (x_max - x_min);
      const double py = y0 - h * series[s].y[i] / y_max;
      out << FormatDouble(px) << ',' << FormatDouble(py) << ' ';
    }
    if (open) out << "\"/>\n";
  }
  Legend(series, out);
  out << "</svg>\n";
}

void WriteBarChartSvg(const std::string& title, const std::string& y_label,
                      const std::vector<std::string>& categories,
                      const std::vector<ChartSeries>& series,
                      std::ostream& out) {
  const double y_max = MaxOf(series);
  Frame(title, "", y_label, y_max, out);
  const double x0 = kLeft, y0 = kHeight - kBottom;
  const double w = kWidth - kRight - kLeft, h = y0 - kTop;
  const double group = w / std::max<std::size_t>(1, categories.size());
  const double bar = group * 0.8 / std::max<std::size_t>(1, series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    out << "<text x=\"" << x0 + group * (c + 0.5) << "\" y=\"" << y0 + 16
        << "\" text-anchor=\"middle\">" << Escape(categories[c])
        << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
      double v = c < series[s].y.size() ? series[s].y[c] : 0.0;
      if (!std::isfinite(v)) v = 0.0;
      const double bh = h * v / y_max;
      out << "<rect x=\"" << FormatDouble(x0 + group * (c + 0.1) + bar * s)
          << "\" y=\"" << FormatDouble(y0 - bh) << "\" width=\""
          << FormatDouble(bar) << "\" height=\"" << FormatDouble(bh)
          << "\" fill=\"" << kPalette[s % 8] << "\"/>\n";
    }
  }
  Legend(series, out);
  out << "</svg>\n";
}

}  // namespace recwatch
