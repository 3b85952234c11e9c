#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "locavqg/nn/graph.hpp"

namespace locavqg::nn {

// Owns the named parameters of one model; insertion order is the iteration
// and serialization order, so checkpoints are deterministic.
class ParamStore {
 public:
  Parameter& create(const std::string& name, Matrix init) {
    if (by_name_.count(name)) throw std::invalid_argument("duplicate param: " + name);
    auto p = std::make_unique<Parameter>(name, std::move(init));
    Parameter& ref = *p;
    by_name_[name] = p.get();
    order_.push_back(std::move(p));
    return ref;
  }

  Parameter& at(const std::string& name) {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw std::out_of_range("no param: " + name);
    return *it->second;
  }

  const Parameter& at(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) throw std::out_of_range("no param: " + name);
    return *it->second;
  }

  bool has(const std::string& name) const { return by_name_.count(name) > 0; }

  std::vector<Parameter*> all() {
    std::vector<Parameter*> out;
    out.reserve(order_.size());
    for (auto& p : order_) out.push_back(p.get());
    return out;
  }

  void zero_grad() {
    for (auto& p : order_) p->grad.setZero();
  }

  size_t count() const { return order_.size(); }

  size_t scalar_count() const {
    size_t n = 0;
    for (const auto& p : order_) n += static_cast<size_t>(p->value.size());
    return n;
  }

  // Binary format: magic, param count, then per param: name, shape, row-major
  // doubles. Little-endian hosts only (checked via the magic on load).
  void save(std::ostream& out) const {
    const char magic[8] = {'L', 'V', 'Q', 'G', 'N', 'N', '1', '\n'};
    out.write(magic, 8);
    write_u32(out, static_cast<uint32_t>(order_.size()));
    for (const auto& p : order_) {
      write_u32(out, static_cast<uint32_t>(p->name.size()));
      out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
      write_u32(out, static_cast<uint32_t>(p->value.rows()));
      write_u32(out, static_cast<uint32_t>(p->value.cols()));
      for (Eigen::Index r = 0; r < p->value.rows(); ++r)
        for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
          double v = p->value(r, c);
          out.write(reinterpret_cast<const char*>(&v), sizeof(double));
        }
    }
    if (!out) throw std::runtime_error("param store: write failed");
  }

  // Loads values into existing parameters; names and shapes must match.
  void load(std::istream& in) {
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "LVQGNN1\n", 8) != 0)
      throw std::runtime_error("param store: bad magic");
    uint32_t count = read_u32(in);
    if (count != order_.size())
      throw std::runtime_error("param store: parameter count mismatch");
    for (uint32_t i = 0; i < count; ++i) {
      uint32_t name_len = read_u32(in);
      std::string name(name_len, '\0');
      in.read(name.data(), name_len);
      uint32_t rows = read_u32(in), cols = read_u32(in);
      Parameter& p = at(name);
      if (p.value.rows() != static_cast<Eigen::Index>(rows) ||
          p.value.cols() != static_cast<Eigen::Index>(cols))
        throw std::runtime_error("param store: shape mismatch for " + name);
      for (Eigen::Index r = 0; r < p.value.rows(); ++r)
        for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
          double v;
          in.read(reinterpret_cast<char*>(&v), sizeof(double));
          p.value(r, c) = v;
        }
      p.grad.setZero();
      p.adam_m.setZero();
      p.adam_v.setZero();
    }
    if (!in) throw std::runtime_error("param store: truncated file");
  }

  void save(const std::string& path) const {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("param store: cannot open " + path);
    save(out);
  }

  void load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("param store: cannot open " + path);
    load(in);
  }

 private:
  static void write_u32(std::ostream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
  }
  static uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  }

  std::vector<std::unique_ptr<Parameter>> order_;
  std::map<std::string, Parameter*> by_name_;
};

// Adam with bias correction; gradients are cleared after each step.
class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  // Optional global-norm clipping; clip <= 0 disables it.
  void step(ParamStore& params, double clip_norm = 0.0) {
    ++t_;
    if (clip_norm > 0.0) {
      double sq = 0.0;
      for (auto* p : params.all()) sq += p->grad.squaredNorm();
      double norm = std::sqrt(sq);
      if (norm > clip_norm) {
        double scale = clip_norm / norm;
        for (auto* p : params.all()) p->grad *= scale;
      }
    }
    double bc1 = 1.0 - std::pow(beta1_, t_);
    double bc2 = 1.0 - std::pow(beta2_, t_);
    for (auto* p : params.all()) {
      p->adam_m = beta1_ * p->adam_m + (1.0 - beta1_) * p->grad;
      p->adam_v = beta2_ * p->adam_v.array().matrix() +
                  (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
      Matrix m_hat = p->adam_m / bc1;
      Matrix v_hat = p->adam_v / bc2;
      p->value.array() -=
          lr_ * m_hat.array() / (v_hat.array().sqrt() + eps_);
      p->grad.setZero();
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

}  // namespace locavqg::nn
