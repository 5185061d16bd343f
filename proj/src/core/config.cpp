#include "core/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"

namespace sirec {

namespace {

using json = nlohmann::json;

const char* const kKeys[] = {
    "w0",          "lambda",     "iters",      "lr_inr",    "lr_inr_decay",
    "lr_poly",     "lr_poly_decay", "decay_every", "poly_order", "hidden_layers",
    "hidden_width", "activation", "use_pe",     "pe_bands",  "use_tv",
    "use_kc",      "seed_inr",   "seed_poly",  "precision"};

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrCode::invalid_argument, std::string("bad value for \"") + key + "\": " + e.what());
  }
}

void positive(double v, const char* field) {
  require(std::isfinite(v) && v > 0, ErrCode::invalid_argument,
          std::string(field) + " must be positive and finite");
}

void non_negative_finite(double v, const char* field) {
  require(std::isfinite(v) && v >= 0, ErrCode::invalid_argument,
          std::string(field) + " must be non-negative and finite");
}

}  // namespace

void validate(const ReconConfig& cfg) {
  positive(cfg.w0, "w0");
  non_negative_finite(cfg.lambda, "lambda");
  require(cfg.iters >= 1, ErrCode::invalid_argument, "iters must be at least 1");
  non_negative_finite(cfg.lr_inr, "lr_inr");
  non_negative_finite(cfg.lr_poly, "lr_poly");
  positive(cfg.lr_inr_decay, "lr_inr_decay");
  positive(cfg.lr_poly_decay, "lr_poly_decay");
  require(cfg.lr_inr_decay <= 1.0 && cfg.lr_poly_decay <= 1.0, ErrCode::invalid_argument,
          "learning-rate decay factors must be in (0, 1]");
  require(cfg.decay_every >= 1, ErrCode::invalid_argument, "decay_every must be at least 1");
  require(cfg.poly_order >= 0, ErrCode::invalid_argument, "poly_order must be non-negative");
  require(cfg.hidden_layers >= 1, ErrCode::invalid_argument, "hidden_layers must be at least 1");
  require(cfg.hidden_width >= 1, ErrCode::invalid_argument, "hidden_width must be at least 1");
  require(cfg.pe_bands >= 1, ErrCode::invalid_argument, "pe_bands must be at least 1");
  require(!(cfg.use_pe && cfg.activation == Activation::sine), ErrCode::invalid_argument,
          "positional encoding is only defined for the relu activation");
}

ReconConfig config_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrCode::invalid_argument, std::string("config is not valid JSON: ") + e.what());
  }
  require(root.is_object(), ErrCode::invalid_argument, "config must be a JSON object");
  for (const auto& item : root.items()) {
    bool known = false;
    for (const char* key : kKeys) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    require(known, ErrCode::invalid_argument,
            "unknown config key \"" + item.key() + "\"");
  }

  ReconConfig cfg;
  read_key(root, "w0", cfg.w0);
  read_key(root, "lambda", cfg.lambda);
  read_key(root, "iters", cfg.iters);
  read_key(root, "lr_inr", cfg.lr_inr);
  read_key(root, "lr_inr_decay", cfg.lr_inr_decay);
  read_key(root, "lr_poly", cfg.lr_poly);
  read_key(root, "lr_poly_decay", cfg.lr_poly_decay);
  read_key(root, "decay_every", cfg.decay_every);
  read_key(root, "poly_order", cfg.poly_order);
  read_key(root, "hidden_layers", cfg.hidden_layers);
  read_key(root, "hidden_width", cfg.hidden_width);
  read_key(root, "pe_bands", cfg.pe_bands);
  read_key(root, "use_pe", cfg.use_pe);
  read_key(root, "use_tv", cfg.use_tv);
  read_key(root, "use_kc", cfg.use_kc);
  read_key(root, "seed_inr", cfg.seed_inr);
  read_key(root, "seed_poly", cfg.seed_poly);
  if (root.contains("activation")) {
    std::string s;
    read_key(root, "activation", s);
    if (s == "sine") {
      cfg.activation = Activation::sine;
    } else if (s == "relu") {
      cfg.activation = Activation::relu;
    } else {
      fail(ErrCode::invalid_argument, "activation must be \"sine\" or \"relu\", got \"" + s + "\"");
    }
  }
  if (root.contains("precision")) {
    std::string s;
    read_key(root, "precision", s);
    if (s == "single") {
      cfg.precision = Precision::single;
    } else if (s == "double") {
      cfg.precision = Precision::dbl;
    } else {
      fail(ErrCode::invalid_argument,
           "precision must be \"single\" or \"double\", got \"" + s + "\"");
    }
  }
  validate(cfg);
  return cfg;
}

std::string config_to_json_text(const ReconConfig& cfg) {
  json root;
  root["w0"] = cfg.w0;
  root["lambda"] = cfg.lambda;
  root["iters"] = cfg.iters;
  root["lr_inr"] = cfg.lr_inr;
  root["lr_inr_decay"] = cfg.lr_inr_decay;
  root["lr_poly"] = cfg.lr_poly;
  root["lr_poly_decay"] = cfg.lr_poly_decay;
  root["decay_every"] = cfg.decay_every;
  root["poly_order"] = cfg.poly_order;
  root["hidden_layers"] = cfg.hidden_layers;
  root["hidden_width"] = cfg.hidden_width;
  root["activation"] = cfg.activation == Activation::sine ? "sine" : "relu";
  root["use_pe"] = cfg.use_pe;
  root["pe_bands"] = cfg.pe_bands;
  root["use_tv"] = cfg.use_tv;
  root["use_kc"] = cfg.use_kc;
  root["seed_inr"] = cfg.seed_inr;
  root["seed_poly"] = cfg.seed_poly;
  root["precision"] = cfg.precision == Precision::single ? "single" : "double";
  return root.dump(2) + "\n";
}

ReconConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrCode::io, "cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

void save_config(const ReconConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrCode::io, "cannot open config for writing: " + path);
  out << config_to_json_text(cfg);
  require(out.good(), ErrCode::io, "failed writing config: " + path);
}

void apply_variant(ReconConfig& cfg, const std::string& variant) {
  if (variant == "full") {
    cfg.activation = Activation::sine;
    cfg.use_pe = false;
    cfg.use_tv = true;
    cfg.use_kc = true;
  } else if (variant == "no-tv") {
    cfg.activation = Activation::sine;
    cfg.use_pe = false;
    cfg.use_tv = false;
    cfg.use_kc = true;
  } else if (variant == "no-kc") {
    cfg.activation = Activation::sine;
    cfg.use_pe = false;
    cfg.use_tv = true;
    cfg.use_kc = false;
  } else if (variant == "relu") {
    cfg.activation = Activation::relu;
    cfg.use_pe = false;
    cfg.use_tv = true;
    cfg.use_kc = true;
  } else if (variant == "relu-pe") {
    cfg.activation = Activation::relu;
    cfg.use_pe = true;
    cfg.use_tv = true;
    cfg.use_kc = true;
  } else {
    fail(ErrCode::invalid_argument,
         "unknown variant \"" + variant + "\" (expected full|no-tv|no-kc|relu|relu-pe)");
  }
}

}  // namespace sirec
