#include "rcnkit/report.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rcnkit/errors.hpp"

namespace rcnkit::bench {
namespace {

namespace fs = std::filesystem;

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Plot geometry: a square [0,1]^2 area with room for axis labels.
constexpr double kLeft = 70, kTop = 20, kSize = 480, kBottom = 60, kRight = 20;

double sx(double recall) { return kLeft + recall * kSize; }
double sy(double precision) { return kTop + (1.0 - precision) * kSize; }

void write_svg(const BenchmarkSummary& summary, const fs::path& path) {
  std::ostringstream svg;
  const double width = kLeft + kSize + kRight;
  const double height = kTop + kSize + kBottom;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // Grid and tick labels every 0.2.
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    svg << "<line x1=\"" << num(sx(v)) << "\" y1=\"" << num(sy(0)) << "\" x2=\""
        << num(sx(v)) << "\" y2=\"" << num(sy(1)) << "\" stroke=\"#dddddd\"/>\n"
        << "<line x1=\"" << num(sx(0)) << "\" y1=\"" << num(sy(v)) << "\" x2=\""
        << num(sx(1)) << "\" y2=\"" << num(sy(v)) << "\" stroke=\"#dddddd\"/>\n"
        << "<text x=\"" << num(sx(v)) << "\" y=\"" << num(sy(0) + 18)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << num(v) << "</text>\n"
        << "<text x=\"" << num(sx(0) - 8) << "\" y=\"" << num(sy(v) + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  svg << "<rect x=\"" << num(sx(0)) << "\" y=\"" << num(sy(1)) << "\" width=\"" << kSize
      << "\" height=\"" << kSize << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << num(sx(0.5)) << "\" y=\"" << num(sy(0) + 40)
      << "\" font-size=\"14\" text-anchor=\"middle\">Recall</text>\n"
      << "<text x=\"" << num(sx(0) - 48) << "\" y=\"" << num(sy(0.5))
      << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 "
      << num(sx(0) - 48) << " " << num(sy(0.5)) << ")\">Precision</text>\n";

  // Iso-F contours: P = F*R / (2R - F), valid while P <= 1; each one
  // passes through (F, F) where its label sits.
  for (int f10 = 5; f10 <= 9; ++f10) {
    const double f = f10 / 10.0;
    const double r_lo = f / (2.0 - f);
    svg << "<polyline fill=\"none\" stroke=\"#55aa55\" stroke-width=\"0.8\" points=\"";
    for (int s = 0; s <= 100; ++s) {
      const double r = r_lo + (1.0 - r_lo) * s / 100.0;
      const double p = f * r / (2.0 * r - f);
      svg << num(sx(r)) << "," << num(sy(std::min(1.0, p))) << " ";
    }
    svg << "\"/>\n"
        << "<text class=\"isof\" x=\"" << num(sx(f) + 4) << "\" y=\"" << num(sy(f) - 4)
        << "\" font-size=\"11\" fill=\"#338833\">" << f10 / 10 << "." << f10 % 10
        << "</text>\n";
  }

  // PR curve, left to right in recall.
  auto pts = summary.pr;
  std::sort(pts.begin(), pts.end(),
            [](const PrPoint& a, const PrPoint& b) { return a.recall < b.recall; });
  svg << "<polyline fill=\"none\" stroke=\"#cc3333\" stroke-width=\"2\" points=\"";
  for (const PrPoint& p : pts) svg << num(sx(p.recall)) << "," << num(sy(p.precision)) << " ";
  svg << "\"/>\n";

  for (const PrPoint& p : summary.pr)
    if (p.threshold == summary.ods_threshold) {
      svg << "<circle cx=\"" << num(sx(p.recall)) << "\" cy=\"" << num(sy(p.precision))
          << "\" r=\"4\" fill=\"#cc3333\"/>\n";
      break;
    }
  char label[160];
  std::snprintf(label, sizeof label, "ODS %.3f; OIS %.3f; AP %.3f", summary.ods, summary.ois,
                summary.ap);
  svg << "<text x=\"" << num(sx(0.02)) << "\" y=\"" << num(sy(0.02))
      << "\" font-size=\"13\">" << label << "</text>\n</svg>\n";

  auto out = open_out(path);
  out << svg.str();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void export_report(const BenchmarkSummary& summary, const std::string& dir) {
  const fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec && !fs::is_directory(base))
    throw IoError("cannot create report directory " + base.string() + ": " + ec.message());

  {
    auto out = open_out(base / "pr.csv");
    out << "threshold,precision,recall,f\n";
    for (const PrPoint& p : summary.pr)
      out << g17(p.threshold) << "," << g17(p.precision) << "," << g17(p.recall) << ","
          << g17(p.f) << "\n";
    if (!out) throw IoError("failed writing " + (base / "pr.csv").string());
  }
  {
    auto out = open_out(base / "summary.csv");
    out << "metric,value\n"
        << "ods," << g17(summary.ods) << "\n"
        << "ods_threshold," << g17(summary.ods_threshold) << "\n"
        << "ois," << g17(summary.ois) << "\n"
        << "ap," << g17(summary.ap) << "\n";
    if (!out) throw IoError("failed writing " + (base / "summary.csv").string());
  }
  write_svg(summary, base / "pr.svg");
}

std::vector<PrPoint> load_pr_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::vector<PrPoint> points;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line != "threshold,precision,recall,f")
        throw IoError("unexpected pr.csv header in " + path + ": " + line);
      continue;
    }
    std::istringstream ss(line);
    PrPoint p;
    char c1, c2, c3;
    if (!(ss >> p.threshold >> c1 >> p.precision >> c2 >> p.recall >> c3 >> p.f) ||
        c1 != ',' || c2 != ',' || c3 != ',')
      throw IoError("malformed pr.csv row in " + path + ": " + line);
    points.push_back(p);
  }
  return points;
}

BenchmarkSummary load_report(const std::string& dir) {
  const fs::path base(dir);
  BenchmarkSummary summary;
  summary.pr = load_pr_csv((base / "pr.csv").string());

  std::ifstream in(base / "summary.csv", std::ios::binary);
  if (!in) throw IoError("cannot read " + (base / "summary.csv").string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    const std::string key = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (key == "metric") continue;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str())
      throw IoError("malformed summary.csv row in " + dir + ": " + line);
    if (key == "ods")
      summary.ods = v;
    else if (key == "ods_threshold")
      summary.ods_threshold = v;
    else if (key == "ois")
      summary.ois = v;
    else if (key == "ap")
      summary.ap = v;
  }
  return summary;
}

}  // namespace rcnkit::bench
