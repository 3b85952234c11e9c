#include <catch_amalgamated.hpp>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <functional>

#include "locavqg/nn/graph.hpp"
#include "locavqg/nn/params.hpp"
#include "locavqg/nn/tokenizer.hpp"
#include "locavqg/nn/transformer.hpp"

using namespace locavqg;
using namespace locavqg::nn;

namespace {

// Central finite differences of a scalar loss against one parameter; returns
// the normalized distance between the analytic and numerical gradients.
double gradient_check(Parameter& p,
                      const std::function<Var(Graph&, const Var&)>& build) {
  auto eval = [&] {
    Graph g;
    return build(g, g.constant(p.value))->value(0, 0);
  };

  p.grad.setZero();
  Graph g;
  Var loss = build(g, g.param(p));
  g.backward(loss);
  Matrix analytic = p.grad;

  const double h = 1e-6;
  Matrix fd(p.value.rows(), p.value.cols());
  for (Eigen::Index r = 0; r < p.value.rows(); ++r)
    for (Eigen::Index c = 0; c < p.value.cols(); ++c) {
      double saved = p.value(r, c);
      p.value(r, c) = saved + h;
      double plus = eval();
      p.value(r, c) = saved - h;
      double minus = eval();
      p.value(r, c) = saved;
      fd(r, c) = (plus - minus) / (2.0 * h);
    }

  double denom = std::max(analytic.norm() + fd.norm(), 1e-12);
  return (analytic - fd).norm() / denom;
}

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng_normal(rng);
  return m;
}

}  // namespace

TEST_CASE("gradients of core ops match finite differences") {
  Rng rng(101);

  SECTION("matmul -> mean_rows") {
    Parameter p("w", random_matrix(rng, 3, 4));
    Matrix other = random_matrix(rng, 4, 5);
    double err = gradient_check(p, [&](Graph& g, const Var& w) {
      Var prod = matmul(g, w, g.constant(other));
      Var pooled = mean_rows(g, prod);
      return matmul_nt(g, pooled, pooled);  // squared norm -> 1x1
    });
    CHECK(err < 1e-6);
  }

  SECTION("add, add_rowvec, scale, relu") {
    Parameter p("w", random_matrix(rng, 4, 3));
    Matrix other = random_matrix(rng, 4, 3);
    Matrix bias = random_matrix(rng, 1, 3);
    double err = gradient_check(p, [&](Graph& g, const Var& w) {
      Var x = add(g, w, g.constant(other));
      x = add_rowvec(g, x, g.constant(bias));
      x = relu(g, scale(g, x, 1.7));
      Var pooled = mean_rows(g, x);
      return matmul_nt(g, pooled, pooled);
    });
    CHECK(err < 1e-5);  // relu kinks tolerated: inputs are away from zero w.h.p.
  }

  SECTION("softmax_rows") {
    Parameter p("w", random_matrix(rng, 3, 6));
    Matrix weights = random_matrix(rng, 6, 1);
    double err = gradient_check(p, [&](Graph& g, const Var& w) {
      Var sm = softmax_rows(g, w);
      Var proj = matmul(g, sm, g.constant(weights));  // 3x1
      return matmul_nt(g, mean_rows(g, proj), mean_rows(g, proj));
    });
    CHECK(err < 1e-6);
  }

  SECTION("layer_norm_rows including gain and bias") {
    Parameter x("x", random_matrix(rng, 3, 5));
    Parameter gain("g", Matrix::Ones(1, 5) + 0.1 * random_matrix(rng, 1, 5));
    Parameter bias("b", 0.1 * random_matrix(rng, 1, 5));
    Matrix proj = random_matrix(rng, 5, 1);
    auto build_with = [&](Graph& g, const Var& xv, const Var& gv, const Var& bv) {
      Var normed = layer_norm_rows(g, xv, gv, bv);
      Var out = matmul(g, normed, g.constant(proj));
      return matmul_nt(g, mean_rows(g, out), mean_rows(g, out));
    };
    double err_x = gradient_check(x, [&](Graph& g, const Var& v) {
      return build_with(g, v, g.constant(gain.value), g.constant(bias.value));
    });
    double err_g = gradient_check(gain, [&](Graph& g, const Var& v) {
      return build_with(g, g.constant(x.value), v, g.constant(bias.value));
    });
    double err_b = gradient_check(bias, [&](Graph& g, const Var& v) {
      return build_with(g, g.constant(x.value), g.constant(gain.value), v);
    });
    CHECK(err_x < 1e-5);
    CHECK(err_g < 1e-6);
    CHECK(err_b < 1e-6);
  }

  SECTION("embedding_rows with repeated ids") {
    Parameter table("t", random_matrix(rng, 6, 4));
    std::vector<int> ids = {2, 5, 2, 0};
    Matrix proj = random_matrix(rng, 4, 1);
    double err = gradient_check(table, [&](Graph& g, const Var& t) {
      Var x = embedding_rows(g, t, ids);
      Var out = matmul(g, x, g.constant(proj));
      return matmul_nt(g, mean_rows(g, out), mean_rows(g, out));
    });
    CHECK(err < 1e-6);
  }

  SECTION("slice_cols and concat_cols") {
    Parameter p("w", random_matrix(rng, 3, 6));
    double err = gradient_check(p, [&](Graph& g, const Var& w) {
      Var left = slice_cols(g, w, 0, 2);
      Var right = slice_cols(g, w, 2, 4);
      Var glued = concat_cols(g, {right, left});
      Var pooled = mean_rows(g, glued);
      return matmul_nt(g, pooled, pooled);
    });
    CHECK(err < 1e-6);
  }

  SECTION("cross_entropy with ignored positions") {
    Parameter p("logits", random_matrix(rng, 4, 7));
    std::vector<int> targets = {3, -1, 0, 6};
    double err = gradient_check(
        p, [&](Graph& g, const Var& w) { return cross_entropy(g, w, targets); });
    CHECK(err < 1e-6);

    // The ignored row must receive exactly zero gradient.
    p.grad.setZero();
    Graph g;
    Var loss = cross_entropy(g, g.param(p), targets);
    g.backward(loss);
    CHECK(p.grad.row(1).norm() == 0.0);
  }
}

TEST_CASE("cross_entropy validates inputs") {
  Graph g;
  Parameter p("logits", Matrix::Zero(2, 3));
  CHECK_THROWS_AS(cross_entropy(g, g.param(p), {0}), std::invalid_argument);
  CHECK_THROWS_AS(cross_entropy(g, g.param(p), {-1, -1}), std::invalid_argument);
}

TEST_CASE("backward requires a scalar loss and accumulates into parameters") {
  Parameter p("w", Matrix::Ones(2, 2));
  Graph g;
  Var w = g.param(p);
  CHECK_THROWS_AS(g.backward(w), std::invalid_argument);

  Var pooled = mean_rows(g, w);                 // 1x2
  Var loss = matmul_nt(g, pooled, pooled);      // 1x1
  g.backward(loss);
  CHECK(p.grad.norm() > 0.0);
}

TEST_CASE("Adam steps descend a convex quadratic and clipping caps the norm") {
  ParamStore params;
  Parameter& w = params.create("w", Matrix::Constant(1, 2, 5.0));
  Adam opt(0.1);

  auto loss_value = [&] { return w.value.squaredNorm(); };
  double before = loss_value();
  for (int i = 0; i < 200; ++i) {
    w.grad = 2.0 * w.value;  // d/dw ||w||^2
    opt.step(params);
  }
  CHECK(loss_value() < before * 1e-3);
  CHECK(w.grad.norm() == 0.0);  // gradients cleared by the step

  // Clipping: a huge gradient scaled down to the clip norm moves the value
  // exactly as the clipped gradient would.
  ParamStore a, b;
  Parameter& pa = a.create("w", Matrix::Constant(1, 1, 1.0));
  Parameter& pb = b.create("w", Matrix::Constant(1, 1, 1.0));
  pa.grad = Matrix::Constant(1, 1, 1e6);
  pb.grad = Matrix::Constant(1, 1, 0.5);
  Adam oa(0.01), ob(0.01);
  oa.step(a, 0.5);
  ob.step(b, 0.0);
  CHECK(pa.value(0, 0) == Catch::Approx(pb.value(0, 0)).epsilon(1e-12));
}

TEST_CASE("param store enforces unique names and deterministic order") {
  ParamStore params;
  params.create("a", Matrix::Zero(1, 1));
  params.create("b", Matrix::Zero(2, 2));
  CHECK_THROWS_AS(params.create("a", Matrix::Zero(1, 1)), std::invalid_argument);
  CHECK(params.count() == 2);
  CHECK(params.scalar_count() == 5);
  CHECK(params.all()[0]->name == "a");
  CHECK(params.has("b"));
  CHECK_THROWS_AS(params.at("c"), std::out_of_range);
}

TEST_CASE("param store binary checkpoints round-trip exactly") {
  auto dir = std::filesystem::temp_directory_path() /
             ("locavqg_nn_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string path = (dir / "weights.bin").string();

  Rng rng(5);
  ParamStore store;
  store.create("w1", random_matrix(rng, 3, 4));
  store.create("w2", random_matrix(rng, 1, 7));
  store.save(path);

  ParamStore loaded;
  loaded.create("w1", Matrix::Zero(3, 4));
  loaded.create("w2", Matrix::Zero(1, 7));
  loaded.load(path);
  CHECK((loaded.at("w1").value - store.at("w1").value).norm() == 0.0);
  CHECK((loaded.at("w2").value - store.at("w2").value).norm() == 0.0);

  ParamStore wrong;
  wrong.create("w1", Matrix::Zero(3, 4));
  CHECK_THROWS(wrong.load(path));
  std::filesystem::remove_all(dir);
}

TEST_CASE("tokenizer builds frequency-ranked vocabulary with stable ties") {
  auto tk = Tokenizer::build({"b a a", "c b a"});
  // freq: a=3, b=2, c=1; ids start after the 4 specials.
  CHECK(tk.vocab_size() == 7);
  CHECK(tk.encode("a")[0] == 4);
  CHECK(tk.encode("b")[0] == 5);
  CHECK(tk.encode("c")[0] == 6);
  CHECK(tk.encode("zzz")[0] == Tokenizer::kUnk);

  // Tie broken lexicographically regardless of input order.
  auto t1 = Tokenizer::build({"x y"});
  auto t2 = Tokenizer::build({"y x"});
  CHECK(t1.fingerprint() == t2.fingerprint());
  CHECK(t1.encode("x")[0] == 4);
}

TEST_CASE("tokenizer respects max_vocab and decodes without specials") {
  auto tk = Tokenizer::build({"a a a b b c"}, 6);
  CHECK(tk.vocab_size() == 6);  // 4 specials + a + b
  CHECK(tk.encode("c")[0] == Tokenizer::kUnk);

  auto full = Tokenizer::build({"what do you think"});
  auto ids = full.encode("what do you think");
  auto padded = ids;
  padded.insert(padded.begin(), Tokenizer::kBos);
  padded.push_back(Tokenizer::kEos);
  CHECK(full.decode(padded) == "what do you think");
  CHECK_THROWS_AS(full.decode({999}), std::out_of_range);
}

TEST_CASE("tokenizer serialization round-trips the fingerprint") {
  auto tk = Tokenizer::build({"what do you think about the old church"});
  auto back = Tokenizer::deserialize(tk.serialize());
  CHECK(back.fingerprint() == tk.fingerprint());
  CHECK(back.vocab_size() == tk.vocab_size());
  CHECK_THROWS_AS(Tokenizer::deserialize("bad\n"), std::runtime_error);
}

TEST_CASE("transformer config is validated") {
  TransformerConfig cfg;
  cfg.vocab_size = 10;
  cfg.d_model = 30;
  cfg.n_heads = 4;  // 30 % 4 != 0
  CHECK_THROWS_AS(Seq2SeqTransformer(cfg, 0), std::invalid_argument);
  cfg.vocab_size = 0;
  cfg.n_heads = 2;
  CHECK_THROWS_AS(Seq2SeqTransformer(cfg, 0), std::invalid_argument);
}

TEST_CASE("transformer forward is deterministic and seed-sensitive") {
  TransformerConfig cfg;
  cfg.vocab_size = 12;
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.ffn_dim = 32;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;
  cfg.max_len = 16;

  std::vector<int> src = {4, 5, 6};
  std::vector<int> dec = {1, 7, 8};

  Seq2SeqTransformer a(cfg, 42), b(cfg, 42), c(cfg, 43);
  Matrix la = a.forward_logits(src, dec);
  CHECK(la.rows() == 3);
  CHECK(la.cols() == 12);
  CHECK((la - b.forward_logits(src, dec)).norm() == 0.0);
  CHECK((la - c.forward_logits(src, dec)).norm() > 0.0);

  // train=true and train=false compute the same values.
  Graph g;
  Var trained = a.forward(g, src, dec, /*train=*/true);
  CHECK((trained->value - la).norm() == 0.0);

  CHECK_THROWS_AS(a.forward_logits({999}, dec), std::invalid_argument);
}

TEST_CASE("transformer checkpoint round-trip reproduces logits bit-for-bit") {
  auto dir = std::filesystem::temp_directory_path() /
             ("locavqg_tf_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::string path = (dir / "weights.bin").string();

  TransformerConfig cfg;
  cfg.vocab_size = 10;
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.ffn_dim = 32;
  cfg.enc_layers = 2;
  cfg.dec_layers = 2;

  Seq2SeqTransformer original(cfg, 7);
  original.params().save(path);
  Seq2SeqTransformer restored(cfg, 99);
  restored.params().load(path);

  std::vector<int> src = {4, 5}, dec = {1, 6};
  CHECK((original.forward_logits(src, dec) - restored.forward_logits(src, dec)).norm() ==
        0.0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("one Adam step on the transformer lowers teacher-forced loss") {
  TransformerConfig cfg;
  cfg.vocab_size = 8;
  cfg.d_model = 16;
  cfg.n_heads = 2;
  cfg.ffn_dim = 32;
  cfg.enc_layers = 1;
  cfg.dec_layers = 1;

  Seq2SeqTransformer net(cfg, 3);
  std::vector<int> src = {4, 5, 6};
  std::vector<int> dec_in = {1, 4, 5};
  std::vector<int> targets = {4, 5, 2};

  auto loss_now = [&] {
    Graph g;
    return cross_entropy(g, net.forward(g, src, dec_in, false), targets)->value(0, 0);
  };
  double before = loss_now();

  Adam opt(1e-2);
  for (int i = 0; i < 10; ++i) {
    net.params().zero_grad();
    Graph g;
    Var loss = cross_entropy(g, net.forward(g, src, dec_in, true), targets);
    g.backward(loss);
    opt.step(net.params(), 1.0);
  }
  CHECK(loss_now() < before);
}
