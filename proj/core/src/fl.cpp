#include "fleetfl/fl.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

#include "fleetfl/error.hpp"

namespace fleetfl::fl {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Mat = Eigen::MatrixXd;

struct Offsets {
  Eigen::Index wi, wh, bi, bh, wo, bo, end;
};

Offsets offsets(const Shape& s) {
  const auto H = static_cast<Eigen::Index>(s.hidden_dim);
  const auto I = static_cast<Eigen::Index>(s.input_dim);
  const auto O = static_cast<Eigen::Index>(s.output_dim);
  Offsets o{};
  o.wi = 0;
  o.wh = o.wi + 3 * H * I;
  o.bi = o.wh + 3 * H * H;
  o.bh = o.bi + 3 * H;
  o.wo = o.bh + 3 * H;
  o.bo = o.wo + O * H;
  o.end = o.bo + O;
  return o;
}

struct ConstView {
  Eigen::Map<const RowMat> Wi, Wh, Wo;
  Eigen::Map<const Eigen::VectorXd> bi, bh, bo;
};

ConstView view(const ModelParams& m) {
  const auto H = static_cast<Eigen::Index>(m.shape.hidden_dim);
  const auto I = static_cast<Eigen::Index>(m.shape.input_dim);
  const auto O = static_cast<Eigen::Index>(m.shape.output_dim);
  const Offsets o = offsets(m.shape);
  const double* p = m.w.data();
  return {Eigen::Map<const RowMat>(p + o.wi, 3 * H, I),
          Eigen::Map<const RowMat>(p + o.wh, 3 * H, H),
          Eigen::Map<const RowMat>(p + o.wo, O, H),
          Eigen::Map<const Eigen::VectorXd>(p + o.bi, 3 * H),
          Eigen::Map<const Eigen::VectorXd>(p + o.bh, 3 * H),
          Eigen::Map<const Eigen::VectorXd>(p + o.bo, O)};
}

void check_model(const ModelParams& m) {
  if (m.shape.output_dim != 1) throw InvalidArgument("GRU head must be scalar");
  if (static_cast<std::size_t>(m.w.size()) != m.shape.parameter_count()) {
    throw InvalidArgument("parameter vector length does not match its shape");
  }
}

std::size_t steps_of(const ModelParams& m, std::span<const trace::Sample> batch) {
  if (batch.empty()) throw InvalidArgument("empty batch");
  const std::size_t len = batch.front().x.size();
  if (len == 0 || len % m.shape.input_dim != 0) {
    throw InvalidArgument("input window length is not a multiple of input_dim");
  }
  for (const auto& s : batch) {
    if (s.x.size() != len) throw InvalidArgument("input windows differ in length");
  }
  return len / m.shape.input_dim;
}

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& a) { return 1.0 / (1.0 + (-a).exp()); }

// Activations of one step, kept for the backward pass.
struct StepCache {
  Mat h_prev, r, z, n, gh_n;
};

struct Forward {
  std::vector<StepCache> steps;
  Mat h;  // final hidden state, H x B
  Eigen::RowVectorXd y;
};

Mat inputs_at(std::span<const trace::Sample> batch, std::size_t step, std::size_t in_dim) {
  Mat x(static_cast<Eigen::Index>(in_dim), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t i = 0; i < in_dim; ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = batch[b].x[step * in_dim + i];
    }
  }
  return x;
}

Forward forward(const ModelParams& m, std::span<const trace::Sample> batch, bool keep) {
  const std::size_t T = steps_of(m, batch);
  const auto H = static_cast<Eigen::Index>(m.shape.hidden_dim);
  const auto B = static_cast<Eigen::Index>(batch.size());
  const ConstView v = view(m);

  Forward f;
  f.h = Mat::Zero(H, B);
  if (keep) f.steps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Mat x = inputs_at(batch, t, m.shape.input_dim);
    const Mat gi = (v.Wi * x).colwise() + v.bi;
    const Mat gh = (v.Wh * f.h).colwise() + v.bh;
    const Eigen::ArrayXXd r = sigmoid(gi.topRows(H).array() + gh.topRows(H).array());
    const Eigen::ArrayXXd z = sigmoid(gi.middleRows(H, H).array() + gh.middleRows(H, H).array());
    const Eigen::ArrayXXd ghn = gh.bottomRows(H).array();
    const Eigen::ArrayXXd n = (gi.bottomRows(H).array() + r * ghn).tanh();
    Mat h_next = ((1.0 - z) * n + z * f.h.array()).matrix();
    if (keep) f.steps.push_back({f.h, r.matrix(), z.matrix(), n.matrix(), ghn.matrix()});
    f.h = std::move(h_next);
  }
  f.y = (v.Wo * f.h).row(0).array() + v.bo[0];
  return f;
}

}  // namespace

std::size_t Shape::parameter_count() const {
  const std::size_t H = hidden_dim, I = input_dim, O = output_dim;
  return 3 * (H * I + H * H + 2 * H) + O * H + O;
}

ModelParams init_model(const Shape& shape, std::uint64_t seed) {
  if (shape.input_dim == 0 || shape.hidden_dim == 0 || shape.output_dim == 0) {
    throw InvalidArgument("init_model: dimensions must be at least 1");
  }
  ModelParams m;
  m.shape = shape;
  m.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape.parameter_count()));
  const Offsets o = offsets(shape);
  const double bound = 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim));
  Rng rng = make_stream(seed, Stream::kInit);
  std::uniform_real_distribution<double> u(-bound, bound);
  auto fill = [&](Eigen::Index from, Eigen::Index to) {
    for (Eigen::Index i = from; i < to; ++i) {
      double x = u(rng);
      while (std::abs(x) >= bound) x = u(rng);
      m.w[i] = x;
    }
  };
  fill(o.wi, o.bi);  // W_i, W_h
  fill(o.wo, o.bo);  // W_o
  return m;
}

double predict(const ModelParams& m, std::span<const double> x) {
  check_model(m);
  trace::Sample s;
  s.x.assign(x.begin(), x.end());
  return forward(m, std::span<const trace::Sample>(&s, 1), false).y[0];
}

double mse(const ModelParams& m, std::span<const trace::Sample> batch) {
  check_model(m);
  const Forward f = forward(m, batch, false);
  double sum = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const double e = f.y[static_cast<Eigen::Index>(b)] - batch[b].y;
    sum += e * e;
  }
  return sum / static_cast<double>(batch.size());
}

double local_objective(const ModelParams& m, std::span<const trace::Sample> batch,
                       const ModelParams& anchor, double mu) {
  const double f = mse(m, batch);
  if (mu == 0.0) return f;
  return f + 0.5 * mu * (m.w - anchor.w).squaredNorm();
}

namespace {

// Backpropagation through time for the MSE term; also returns the loss.
Eigen::VectorXd backprop(const ModelParams& m, std::span<const trace::Sample> batch,
                         double* loss) {
  check_model(m);
  const Forward f = forward(m, batch, true);
  const auto H = static_cast<Eigen::Index>(m.shape.hidden_dim);
  const std::size_t in_dim = m.shape.input_dim;
  const ConstView v = view(m);
  const Offsets o = offsets(m.shape);

  Eigen::VectorXd g = Eigen::VectorXd::Zero(m.w.size());
  Eigen::Map<RowMat> dWi(g.data() + o.wi, 3 * H, static_cast<Eigen::Index>(in_dim));
  Eigen::Map<RowMat> dWh(g.data() + o.wh, 3 * H, H);
  Eigen::Map<RowMat> dWo(g.data() + o.wo, 1, H);
  Eigen::Map<Eigen::VectorXd> dbi(g.data() + o.bi, 3 * H);
  Eigen::Map<Eigen::VectorXd> dbh(g.data() + o.bh, 3 * H);

  Eigen::RowVectorXd dy(f.y.size());
  for (Eigen::Index b = 0; b < dy.size(); ++b) {
    dy[b] = 2.0 * (f.y[b] - batch[static_cast<std::size_t>(b)].y) / static_cast<double>(dy.size());
  }
  dWo += dy * f.h.transpose();
  g[o.bo] = dy.sum();
  Mat dh = v.Wo.transpose() * dy;

  const auto B = dy.size();
  Mat dgi(3 * H, B), dgh(3 * H, B);
  for (std::size_t t = f.steps.size(); t-- > 0;) {
    const StepCache& c = f.steps[t];
    const Eigen::ArrayXXd r = c.r.array(), z = c.z.array(), n = c.n.array();
    const Eigen::ArrayXXd dn = dh.array() * (1.0 - z);
    const Eigen::ArrayXXd dz = dh.array() * (c.h_prev.array() - n);
    const Eigen::ArrayXXd dan = dn * (1.0 - n * n);
    const Eigen::ArrayXXd dar = dan * c.gh_n.array() * r * (1.0 - r);
    const Eigen::ArrayXXd daz = dz * z * (1.0 - z);

    dgi.topRows(H) = dar.matrix();
    dgi.middleRows(H, H) = daz.matrix();
    dgi.bottomRows(H) = dan.matrix();
    dgh.topRows(H) = dar.matrix();
    dgh.middleRows(H, H) = daz.matrix();
    dgh.bottomRows(H) = (dan * r).matrix();

    dWi += dgi * inputs_at(batch, t, in_dim).transpose();
    dbi += dgi.rowwise().sum();
    dWh += dgh * c.h_prev.transpose();
    dbh += dgh.rowwise().sum();
    dh = (dh.array() * z).matrix() + v.Wh.transpose() * dgh;
  }
  if (loss != nullptr) {
    double sum = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const double e = f.y[static_cast<Eigen::Index>(b)] - batch[b].y;
      sum += e * e;
    }
    *loss = sum / static_cast<double>(batch.size());
  }
  return g;
}

}  // namespace

Eigen::VectorXd mse_gradient(const ModelParams& m, std::span<const trace::Sample> batch) {
  return backprop(m, batch, nullptr);
}

Eigen::VectorXd gradient(const ModelParams& m, std::span<const trace::Sample> batch,
                         const ModelParams& anchor, double mu) {
  Eigen::VectorXd g = mse_gradient(m, batch);
  if (mu != 0.0) g += mu * (m.w - anchor.w);
  return g;
}

MiniBatchSampler::MiniBatchSampler(std::size_t n, std::size_t batch_size, Rng rng)
    : order_(n), batch_(std::min(batch_size, n)), pos_(n), rng_(std::move(rng)) {
  if (n == 0) throw InvalidArgument("MiniBatchSampler: empty dataset");
  if (batch_size == 0) throw InvalidArgument("MiniBatchSampler: batch size must be positive");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::span<const std::size_t> MiniBatchSampler::next() {
  if (pos_ + batch_ > order_.size()) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    pos_ = 0;
  }
  const std::span<const std::size_t> out(order_.data() + pos_, batch_);
  pos_ += batch_;
  return out;
}

LocalUpdate train_local(const ModelParams& global, std::span<const trace::Sample> data,
                        std::int64_t iterations, const HyperParams& hp, Rng rng) {
  if (data.empty()) throw InvalidArgument("train_local: empty dataset");
  if (iterations < 1) throw InvalidArgument("train_local: need at least one iteration");
  if (!(hp.lr >= 0.0) || hp.mu < 0.0) throw InvalidArgument("train_local: bad hyperparameters");

  LocalUpdate up;
  up.w = global;
  up.iterations = iterations;
  up.sample_count = data.size();

  MiniBatchSampler sampler(data.size(), hp.batch_size, std::move(rng));
  std::vector<trace::Sample> batch;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(global.w.size());
  double loss_sum = 0.0;
  for (std::int64_t it = 0; it < iterations; ++it) {
    batch.clear();
    for (std::size_t i : sampler.next()) batch.push_back(data[i]);
    double loss = 0.0;
    Eigen::VectorXd g = backprop(up.w, batch, &loss);
    if (hp.mu != 0.0) g += hp.mu * (up.w.w - global.w);
    loss_sum += loss;
    velocity = hp.momentum * velocity + g;
    up.w.w -= hp.lr * velocity;
  }
  up.loss = loss_sum / static_cast<double>(iterations);
  return up;
}

double inexactness(const ModelParams& local, const ModelParams& global,
                   std::span<const trace::Sample> data, double mu) {
  const double den = gradient(global, data, global, mu).norm();
  if (den == 0.0) return 0.0;
  return gradient(local, data, global, mu).norm() / den;
}

ModelParams aggregate(std::span<const LocalUpdate> updates) {
  if (updates.empty()) throw InvalidArgument("aggregate: no updates");
  std::vector<const LocalUpdate*> order;
  order.reserve(updates.size());
  for (const auto& u : updates) order.push_back(&u);
  std::stable_sort(order.begin(), order.end(),
                   [](const LocalUpdate* a, const LocalUpdate* b) { return a->agent < b->agent; });
  ModelParams out = order.front()->w;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!(order[i]->w.shape == out.shape) || order[i]->w.w.size() != out.w.size()) {
      throw InvalidArgument("aggregate: shape mismatch");
    }
    out.w += order[i]->w.w;
  }
  out.w /= static_cast<double>(order.size());
  return out;
}

IterationBudget compute_iterations(double d_cmp, double d_cmp_per_iter) {
  if (!(d_cmp_per_iter > 0.0)) throw InvalidArgument("compute_iterations: per-step delay must be positive");
  const double steps = std::floor(std::max(d_cmp, 0.0) / d_cmp_per_iter);
  if (steps < 1.0) return {1, true};
  return {static_cast<std::int64_t>(steps), false};
}

double per_iter_compute_delay(double eta, std::size_t batch_samples, double rho) {
  if (!(eta > 0.0) || batch_samples == 0 || !(rho > 0.0)) {
    throw InvalidArgument("per_iter_compute_delay: arguments must be positive");
  }
  return eta * static_cast<double>(batch_samples) / rho;
}

double payload_bits(const ModelParams& m, double fpp) {
  if (!(fpp > 0.0)) throw InvalidArgument("payload_bits: fpp must be positive");
  return static_cast<double>(m.w.size()) * fpp;
}

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw Error("checkpoint truncated");
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(bytes[i]) << (8 * i);
  return value;
}

constexpr char kMagic[4] = {'F', 'F', 'L', 'W'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

std::uint64_t checksum(const ModelParams& m) {
  std::uint64_t h = 14695981039346656037ull;
  for (Eigen::Index i = 0; i < m.w.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(m.w[i]);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

void write_checkpoint(std::ostream& out, const ModelParams& m) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.shape.input_dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.shape.hidden_dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.shape.output_dim));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.w.size()));
  for (Eigen::Index i = 0; i < m.w.size(); ++i) put_le(out, std::bit_cast<std::uint64_t>(m.w[i]));
  if (!out) throw Error("checkpoint write failed");
}

ModelParams read_checkpoint(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error("checkpoint: bad magic");
  if (get_le<std::uint32_t>(in) != kVersion) throw Error("checkpoint: unsupported version");
  ModelParams m;
  m.shape.input_dim = get_le<std::uint32_t>(in);
  m.shape.hidden_dim = get_le<std::uint32_t>(in);
  m.shape.output_dim = get_le<std::uint32_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  if (count != m.shape.parameter_count()) throw Error("checkpoint: count does not match shape");
  m.w.resize(static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < m.w.size(); ++i) m.w[i] = std::bit_cast<double>(get_le<std::uint64_t>(in));
  return m;
}

}  // namespace fleetfl::fl
