#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "latentad/csv.hpp"
#include "latentad/error.hpp"
#include "latentad/simulate.hpp"

namespace latentad {

namespace {

void check_table(const PowerTable& t) {
  if (t.rows.empty() || t.deltas.empty() || t.n_list.empty()) {
    throw InvalidInput("power table is empty; nothing to write");
  }
  if (t.rows.size() != t.deltas.size() * t.n_list.size()) {
    throw InvalidInput("power table rows do not cover the delta by n grid");
  }
  for (const auto& r : t.rows) {
    if (!(r.rejection_frequency >= 0.0 && r.rejection_frequency <= 1.0)) {
      throw InvalidInput("rejection frequency outside [0, 1]");
    }
  }
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string power_csv(const PowerTable& table) {
  check_table(table);
  std::ostringstream os;
  for (const auto& m : table.metadata) os << "# " << m << '\n';
  os << "delta,n,reps,completed,excluded,rejections,rejection_frequency,mc_std_error,"
        "mean_theta,sd_theta,mean_z\n";
  for (const auto& r : table.rows) {
    os << csv::format_double(r.delta) << ',' << r.n << ',' << r.reps << ',' << r.completed << ','
       << r.excluded << ',' << r.rejections << ',' << csv::format_double(r.rejection_frequency)
       << ',' << csv::format_double(r.mc_std_error) << ',' << csv::format_double(r.mean_theta)
       << ',' << csv::format_double(r.sd_theta) << ',' << csv::format_double(r.mean_z) << '\n';
  }
  return os.str();
}

std::string power_svg(const PowerTable& table) {
  check_table(table);
  const double width = 640, height = 420, left = 70, right = 150, top = 30, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  double dmin = *std::min_element(table.deltas.begin(), table.deltas.end());
  double dmax = *std::max_element(table.deltas.begin(), table.deltas.end());
  if (dmax - dmin < 1e-12) {
    dmin -= 0.05;
    dmax += 0.05;
  }
  auto px = [&](double d) { return left + pw * (d - dmin) / (dmax - dmin); };
  auto py = [&](double p) { return top + ph * (1.0 - p); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  os << "<path d=\"M" << fmt(left, 2) << ' ' << fmt(top, 2) << " V" << fmt(top + ph, 2) << " H"
     << fmt(left + pw, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double p = k / 4.0;
    os << "<path d=\"M" << fmt(left - 5, 2) << ' ' << fmt(py(p), 2) << " H" << fmt(left, 2)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(left - 8, 2) << "\" y=\"" << fmt(py(p) + 4, 2)
       << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(p, 2) << "</text>\n";
  }
  for (double d : table.deltas) {
    os << "<path d=\"M" << fmt(px(d), 2) << ' ' << fmt(top + ph, 2) << " V"
       << fmt(top + ph + 5, 2) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(px(d), 2) << "\" y=\"" << fmt(top + ph + 18, 2)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << csv::format_double(d) << "</text>\n";
  }
  os << "<text x=\"" << fmt(left + pw / 2, 2) << "\" y=\"" << fmt(height - 15, 2)
     << "\" font-size=\"13\" text-anchor=\"middle\">delta</text>\n";
  os << "<text x=\"18\" y=\"" << fmt(top + ph / 2, 2)
     << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
     << fmt(top + ph / 2, 2) << ")\">rejection frequency</text>\n";

  os << "<line x1=\"" << fmt(left, 2) << "\" y1=\"" << fmt(py(table.size), 2) << "\" x2=\""
     << fmt(left + pw, 2) << "\" y2=\"" << fmt(py(table.size), 2)
     << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";

  const std::size_t nn = table.n_list.size();
  for (std::size_t j = 0; j < nn; ++j) {
    const char* color = kColors[j % std::size(kColors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < table.deltas.size(); ++i) {
      const auto& r = table.rows[i * nn + j];
      os << (i ? " " : "") << fmt(px(r.delta), 2) << ',' << fmt(py(r.rejection_frequency), 2);
    }
    os << "\"/>\n";
    const double ly = top + 20.0 * static_cast<double>(j + 1);
    os << "<text x=\"" << fmt(left + pw + 15, 2) << "\" y=\"" << fmt(ly, 2)
       << "\" font-size=\"12\" fill=\"" << color << "\">n = " << table.n_list[j] << "</text>\n";
  }
  os << "<text x=\"" << fmt(left + pw + 15, 2) << "\" y=\""
     << fmt(top + 20.0 * static_cast<double>(nn + 1), 2)
     << "\" font-size=\"12\" fill=\"gray\">size " << csv::format_double(table.size)
     << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void emit_power_outputs(const PowerTable& table, const std::string& path_prefix) {
  const std::string csv_text = power_csv(table);
  const std::string svg_text = power_svg(table);
  for (const auto& [suffix, text] :
       {std::pair{std::string("_power.csv"), &csv_text}, {std::string("_power.svg"), &svg_text}}) {
    const std::string path = path_prefix + suffix;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
    out << *text;
    if (!out) throw InvalidInput("write to '" + path + "' failed");
  }
}

}  // namespace latentad
