// Copyright 2026 The qmemsim Authors
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

#include "qmem/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmem {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double get_double(const FlatConfig& cfg, const std::string& key,
                  double fallback) {
  auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  try {
    std::size_t pos = 0;
    double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing data");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad numeric value for key '" + key +
                                "': " + it->second);
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

FlatConfig parse_flat_config(const std::string& text) {
  FlatConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: missing '=' on line " +
                                  std::to_string(lineno));
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config: empty key on line " +
                                  std::to_string(lineno));
    }
    cfg[key] = value;
  }
  return cfg;
}

FlatConfig read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot open file: " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_flat_config(ss.str());
}

MemoryConfig memory_config_from(const FlatConfig& cfg) {
  MemoryConfig m;
  m.eta_total = get_double(cfg, "eta_total", m.eta_total);
  m.eta_read = get_double(cfg, "eta_read", m.eta_read);
  m.p_background = get_double(cfg, "p_background", m.p_background);
  m.p_stray = get_double(cfg, "p_stray", m.p_stray);
  m.b_guide_gauss = get_double(cfg, "b_guide_gauss", m.b_guide_gauss);
  m.sigma_b_long_gauss =
      get_double(cfg, "sigma_b_long_gauss", m.sigma_b_long_gauss);
  m.sigma_b_trans_gauss =
      get_double(cfg, "sigma_b_trans_gauss", m.sigma_b_trans_gauss);
  m.g_f = get_double(cfg, "g_f", m.g_f);
  m.gyromagnetic_mhz_per_gauss =
      get_double(cfg, "gyromagnetic_mhz_per_gauss", m.gyromagnetic_mhz_per_gauss);
  m.readout_phase_offset_rad =
      get_double(cfg, "readout_phase_offset_rad", m.readout_phase_offset_rad);
  m.readout_window_us = get_double(cfg, "readout_window_us", m.readout_window_us);
  m.cavity.g_mhz = get_double(cfg, "cavity_g_mhz", m.cavity.g_mhz);
  m.cavity.kappa_mhz = get_double(cfg, "cavity_kappa_mhz", m.cavity.kappa_mhz);
  m.cavity.gamma_mhz = get_double(cfg, "cavity_gamma_mhz", m.cavity.gamma_mhz);
  m.validate();
  return m;
}

DetectionChain detection_chain_from(const FlatConfig& cfg) {
  DetectionChain c;
  c.r_resonant = get_double(cfg, "r_resonant", c.r_resonant);
  c.r_detpath = get_double(cfg, "r_detpath", c.r_detpath);
  c.t_outcoupler = get_double(cfg, "t_outcoupler", c.t_outcoupler);
  c.eta_det = get_double(cfg, "eta_det", c.eta_det);
  c.validate();
  return c;
}

double default_nbar_from(const FlatConfig& cfg, double fallback) {
  return get_double(cfg, "default_nbar", fallback);
}

std::string format_config(const MemoryConfig& m, const DetectionChain& c,
                          double default_nbar) {
  std::ostringstream out;
  out << "# memory channel\n";
  out << "eta_total = " << format_double(m.eta_total) << "\n";
  out << "eta_read = " << format_double(m.eta_read) << "\n";
  out << "p_background = " << format_double(m.p_background) << "\n";
  out << "p_stray = " << format_double(m.p_stray) << "\n";
  out << "b_guide_gauss = " << format_double(m.b_guide_gauss) << "\n";
  out << "sigma_b_long_gauss = " << format_double(m.sigma_b_long_gauss) << "\n";
  out << "sigma_b_trans_gauss = " << format_double(m.sigma_b_trans_gauss)
      << "\n";
  out << "g_f = " << format_double(m.g_f) << "\n";
  out << "gyromagnetic_mhz_per_gauss = "
      << format_double(m.gyromagnetic_mhz_per_gauss) << "\n";
  out << "readout_phase_offset_rad = "
      << format_double(m.readout_phase_offset_rad) << "\n";
  out << "readout_window_us = " << format_double(m.readout_window_us) << "\n";
  out << "cavity_g_mhz = " << format_double(m.cavity.g_mhz) << "\n";
  out << "cavity_kappa_mhz = " << format_double(m.cavity.kappa_mhz) << "\n";
  out << "cavity_gamma_mhz = " << format_double(m.cavity.gamma_mhz) << "\n";
  out << "# detection chain\n";
  out << "r_resonant = " << format_double(c.r_resonant) << "\n";
  out << "r_detpath = " << format_double(c.r_detpath) << "\n";
  out << "t_outcoupler = " << format_double(c.t_outcoupler) << "\n";
  out << "eta_det = " << format_double(c.eta_det) << "\n";
  out << "# harness defaults\n";
  out << "default_nbar = " << format_double(default_nbar) << "\n";
  return out.str();
}

void write_config_file(const std::string& path, const MemoryConfig& m,
                       const DetectionChain& c, double default_nbar) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("config: cannot write file: " + path);
  }
  out << format_config(m, c, default_nbar);
}

}  // namespace qmem
