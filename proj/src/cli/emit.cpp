// Copyright 2026 The collapse-lab Authors
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

#include "collapse_lab/cli/emit.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace collapse_lab::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return std::signbit(v) ? "-0" : "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string json_string(const std::string& s) { return Json(s).dump(); }

// JSON numbers cannot hold non-finite values; they become strings carrying
// the same token the CSV uses.
std::string json_number(double v) {
  const auto s = format_number(v);
  return std::isfinite(v) ? s : json_string(s);
}

void write_json(std::ostringstream& os, const Json& j, int depth);

void indent(std::ostringstream& os, int depth) { os << std::string(static_cast<std::size_t>(2 * depth), ' '); }

void write_json(std::ostringstream& os, const Json& j, int depth) {
  if (j.is_object()) {
    if (j.empty()) {
      os << "{}";
      return;
    }
    os << "{\n";
    bool first = true;
    for (const auto& item : j.items()) {
      if (!first) os << ",\n";
      first = false;
      indent(os, depth + 1);
      os << json_string(item.key()) << ": ";
      write_json(os, item.value(), depth + 1);
    }
    os << "\n";
    indent(os, depth);
    os << "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      os << "[]";
      return;
    }
    os << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) os << ",\n";
      indent(os, depth + 1);
      write_json(os, j[i], depth + 1);
    }
    os << "\n";
    indent(os, depth);
    os << "]";
  } else if (j.is_number_float()) {
    os << json_number(j.get<double>());
  } else {
    os << j.dump();
  }
}

}  // namespace

std::string to_csv(const RunReport& report) {
  std::ostringstream os;
  os << "quantity,index,value,residual\n";
  for (const auto& r : report.records) {
    os << csv_field(r.quantity) << ',' << csv_field(r.index) << ',' << format_number(r.value) << ','
       << (r.residual ? format_number(*r.residual) : std::string()) << '\n';
  }
  return os.str();
}

std::string to_json(const RunReport& report) {
  Json j;
  j["kind"] = report.kind;
  if (report.seed) j["seed"] = *report.seed;
  j["config"] = report.config_echo;
  j["status"] = {{"exit_code", report.exit_code()}, {"invariants_pass", report.invariants_pass()}};
  Json inv = Json::array();
  for (const auto& c : report.invariants) {
    inv.push_back({{"label", c.label}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  }
  j["invariants"] = inv;
  // Records grouped by quantity, in first-appearance order.
  Json results = Json::object();
  for (const auto& r : report.records) {
    Json row = {{"index", r.index}, {"value", r.value}};
    row["residual"] = r.residual ? Json(*r.residual) : Json(nullptr);
    if (!results.contains(r.quantity)) results[r.quantity] = Json::array();
    results[r.quantity].push_back(row);
  }
  j["results"] = results;
  j["notes"] = report.notes;
  std::ostringstream os;
  write_json(os, j, 0);
  os << "\n";
  return os.str();
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

}  // namespace

std::string to_svg(const Plot& plot) {
  constexpr double W = 640, H = 420, L = 70, R = 180, T = 40, B = 55;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : plot.series) {
    for (double x : s.x) x0 = std::min(x0, x), x1 = std::max(x1, x);
    for (double y : s.y) {
      if (!std::isfinite(y)) continue;
      y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x1 = x0 + 1;
  if (y1 - y0 <= 0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << xml_escape(plot.title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
    os << "<text x=\"" << fixed(px(xv)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
       << tick(xv) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(yv) + 4) << "\" text-anchor=\"end\">"
       << tick(yv) << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14 << "\" text-anchor=\"middle\">"
     << xml_escape(plot.x_label) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">" << xml_escape(plot.y_label) << "</text>\n";

  for (std::size_t i = 0; i < plot.series.size(); ++i) {
    const auto& s = plot.series[i];
    const char* color = kPalette[i % (sizeof kPalette / sizeof *kPalette)];
    if (s.scatter) {
      os << "<g fill=\"" << color << "\" fill-opacity=\"0.5\">\n";
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.y[k])) continue;
        os << "<circle cx=\"" << fixed(px(s.x[k])) << "\" cy=\"" << fixed(py(s.y[k])) << "\" r=\"1.6\"/>\n";
      }
      os << "</g>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        if (!std::isfinite(s.y[k])) continue;
        os << (k ? " " : "") << fixed(px(s.x[k])) << ',' << fixed(py(s.y[k]));
      }
      os << "\"/>\n";
    }
    const double ly = T + 14 + 16 * static_cast<double>(i);
    os << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\""
       << color << "\"/>\n";
    os << "<text x=\"" << W - R + 25 << "\" y=\"" << ly << "\">" << xml_escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<ManifestEntry> emit_report(const RunReport& report, const std::filesystem::path& dir,
                                       const std::vector<std::string>& formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string() +
                  (ec ? " (" + ec.message() + ")" : std::string()));
  }
  std::vector<ManifestEntry> manifest;
  auto emit = [&](const std::string& name, const std::string& bytes) {
    write_file(dir / name, bytes);
    manifest.push_back({name, sha256_hex(bytes)});
  };
  auto wants = [&](const char* f) { return std::find(formats.begin(), formats.end(), f) != formats.end(); };
  if (wants("csv")) emit(report.kind + ".csv", to_csv(report));
  if (wants("json")) emit(report.kind + ".json", to_json(report));
  if (wants("svg")) {
    for (const auto& plot : report.plots) emit(report.kind + "_" + plot.stem + ".svg", to_svg(plot));
  }
  return manifest;
}

}  // namespace collapse_lab::cli
