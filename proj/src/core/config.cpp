#include "core/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace sfuda {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw Error("bad numeric value: " + s);
  }
  if (pos != s.size()) throw Error("bad numeric value: " + s);
  return v;
}

long long parse_int(const std::string& s) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw Error("bad integer value: " + s);
  }
  if (pos != s.size()) throw Error("bad integer value: " + s);
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error("bad boolean value: " + s);
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const AdaptationConfig&)> get;
  std::function<void(AdaptationConfig&, const std::string&)> set;
};

#define DOUBLE_FIELD(section, key, member)                                   \
  {section, key, [](const AdaptationConfig& c) { return fmt_double(c.member); }, \
   [](AdaptationConfig& c, const std::string& v) { c.member = parse_double(v); }}
#define INT_FIELD(section, key, member)                                        \
  {section, key, [](const AdaptationConfig& c) { return std::to_string(c.member); }, \
   [](AdaptationConfig& c, const std::string& v) { c.member = static_cast<int>(parse_int(v)); }}
#define BOOL_FIELD(section, key, member)                                               \
  {section, key, [](const AdaptationConfig& c) { return c.member ? "true" : "false"; }, \
   [](AdaptationConfig& c, const std::string& v) { c.member = parse_bool(v); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      INT_FIELD("data", "n_source", data.n_source),
      INT_FIELD("data", "n_target", data.n_target),
      INT_FIELD("data", "classes", data.classes),
      DOUBLE_FIELD("data", "rotation", data.rotation),
      DOUBLE_FIELD("data", "translation_x", data.translation_x),
      DOUBLE_FIELD("data", "translation_y", data.translation_y),
      DOUBLE_FIELD("data", "noise_scale", data.noise_scale),
      DOUBLE_FIELD("data", "moon_noise", data.moon_noise),
      DOUBLE_FIELD("data", "moon_sep", data.moon_sep),
      DOUBLE_FIELD("data", "blob_radius", data.blob_radius),
      DOUBLE_FIELD("data", "blob_noise", data.blob_noise),
      DOUBLE_FIELD("data", "sigma_weak", data.sigma_weak),
      DOUBLE_FIELD("data", "sigma_strong", data.sigma_strong),
      DOUBLE_FIELD("data", "scale_min", data.scale_min),
      DOUBLE_FIELD("data", "scale_max", data.scale_max),
      DOUBLE_FIELD("data", "drop_prob", data.drop_prob),
      INT_FIELD("model", "input_dim", model.input_dim),
      {"model", "hidden",
       [](const AdaptationConfig& c) {
         std::string s;
         for (int h : c.model.hidden) {
           if (!s.empty()) s += ",";
           s += std::to_string(h);
         }
         return s;
       },
       [](AdaptationConfig& c, const std::string& v) {
         c.model.hidden.clear();
         std::istringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ',')) {
           if (!item.empty()) c.model.hidden.push_back(static_cast<int>(parse_int(item)));
         }
       }},
      INT_FIELD("model", "bottleneck_dim", model.bottleneck_dim),
      INT_FIELD("adapt", "k_neighbors", k_neighbors),
      INT_FIELD("adapt", "history_len", history_len),
      INT_FIELD("adapt", "queue_capacity", queue_capacity),
      DOUBLE_FIELD("adapt", "ema_momentum", ema_momentum),
      DOUBLE_FIELD("adapt", "temperature", temperature),
      DOUBLE_FIELD("adapt", "gamma_cls", gamma_cls),
      DOUBLE_FIELD("adapt", "gamma_ctr", gamma_ctr),
      DOUBLE_FIELD("adapt", "gamma_div", gamma_div),
      {"adapt", "weighting_mode",
       [](const AdaptationConfig& c) -> std::string {
         switch (c.weighting_mode) {
           case WeightingMode::kExponential: return "exponential";
           case WeightingMode::kLinear: return "linear";
           case WeightingMode::kHard: return "hard";
         }
         return "exponential";
       },
       [](AdaptationConfig& c, const std::string& v) {
         if (v == "exponential") c.weighting_mode = WeightingMode::kExponential;
         else if (v == "linear") c.weighting_mode = WeightingMode::kLinear;
         else if (v == "hard") c.weighting_mode = WeightingMode::kHard;
         else throw Error("bad weighting_mode: " + v);
       }},
      DOUBLE_FIELD("adapt", "hard_threshold", hard_threshold),
      {"adapt", "classification_mode",
       [](const AdaptationConfig& c) -> std::string {
         switch (c.classification_mode) {
           case ClassificationMode::kNegative: return "negative";
           case ClassificationMode::kPositive: return "positive";
           case ClassificationMode::kPositiveNegative: return "positive_negative";
         }
         return "negative";
       },
       [](AdaptationConfig& c, const std::string& v) {
         if (v == "negative") c.classification_mode = ClassificationMode::kNegative;
         else if (v == "positive") c.classification_mode = ClassificationMode::kPositive;
         else if (v == "positive_negative")
           c.classification_mode = ClassificationMode::kPositiveNegative;
         else throw Error("bad classification_mode: " + v);
       }},
      {"adapt", "exclusion_rule",
       [](const AdaptationConfig& c) -> std::string {
         return c.exclusion_rule == ExclusionRule::kAlignedEpochs ? "aligned" : "any";
       },
       [](AdaptationConfig& c, const std::string& v) {
         if (v == "aligned") c.exclusion_rule = ExclusionRule::kAlignedEpochs;
         else if (v == "any") c.exclusion_rule = ExclusionRule::kAnyIntersection;
         else throw Error("bad exclusion_rule: " + v);
       }},
      BOOL_FIELD("adapt", "refinement", refinement),
      BOOL_FIELD("adapt", "contrastive", contrastive),
      BOOL_FIELD("adapt", "negative_learning", negative_learning),
      BOOL_FIELD("adapt", "temporal_exclusion", temporal_exclusion),
      BOOL_FIELD("adapt", "uncertainty_reweighting", uncertainty_reweighting),
      INT_FIELD("adapt", "epochs", epochs),
      INT_FIELD("adapt", "batch_size", batch_size),
      DOUBLE_FIELD("adapt", "learning_rate", learning_rate),
      DOUBLE_FIELD("adapt", "sgd_momentum", sgd_momentum),
      INT_FIELD("adapt", "source_epochs", source_epochs),
      DOUBLE_FIELD("adapt", "source_learning_rate", source_learning_rate),
      DOUBLE_FIELD("adapt", "label_smoothing", label_smoothing),
      {"adapt", "seed",
       [](const AdaptationConfig& c) { return std::to_string(c.seed); },
       [](AdaptationConfig& c, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(parse_int(v));
       }},
      BOOL_FIELD("adapt", "save_models", save_models),
      BOOL_FIELD("adapt", "dump_data", dump_data),
      BOOL_FIELD("adapt", "dump_diagnostics", dump_diagnostics),
  };
  return table;
}

#undef DOUBLE_FIELD
#undef INT_FIELD
#undef BOOL_FIELD

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const Field& find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (f.section == section && f.key == key) return f;
  }
  throw Error("unknown config key: " + section + "." + key);
}

}  // namespace

AdaptationConfig parse_config(const std::string& text) {
  AdaptationConfig config;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const Field& f : fields()) known = known || f.section == section;
      if (!known) throw Error("unknown config section: " + section);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error("malformed config line " + std::to_string(lineno) + ": " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw Error("key outside a section: " + key);
    find_field(section, key).set(config, value);
  }
  return config;
}

AdaptationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const AdaptationConfig& config) {
  std::ostringstream out;
  out << "# sfuda-config v1\n";
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      section = f.section;
      out << "[" << section << "]\n";
    }
    out << f.key << " = " << f.get(config) << "\n";
  }
  return out.str();
}

void save_config(const AdaptationConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open config file for writing: " + path);
  out << serialize_config(config);
  if (!out) throw Error("write failure: " + path);
}

bool operator==(const AdaptationConfig& a, const AdaptationConfig& b) {
  return serialize_config(a) == serialize_config(b);
}

void set_config_value(AdaptationConfig& config, const std::string& key, const std::string& value) {
  const std::size_t dotpos = key.find('.');
  if (dotpos == std::string::npos) throw Error("expected section.key, got: " + key);
  find_field(key.substr(0, dotpos), key.substr(dotpos + 1)).set(config, value);
}

std::string get_config_value(const AdaptationConfig& config, const std::string& key) {
  const std::size_t dotpos = key.find('.');
  if (dotpos == std::string::npos) throw Error("expected section.key, got: " + key);
  return find_field(key.substr(0, dotpos), key.substr(dotpos + 1)).get(config);
}

}  // namespace sfuda
