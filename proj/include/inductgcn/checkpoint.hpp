#pragma once

// Checkpoint layout (all integers little-endian, reals are IEEE-754 binary64
// stored by bit pattern, so a save/load cycle is bit-exact on any platform):
//
//   magic        8 bytes  "IGCNCKPT"
//   version      u32      kCheckpointVersion
//   kind         u8       0 = gcn, 1 = sgc
//   batch norm   u8       0 = symmetric, 1 = none
//   lowercase    u8
//   min_freq     u64
//   config       u64 max_epochs, u64 patience, u64 hidden, f64 learning_rate,
//                f64 dropout, f64 weight_decay, u64 seed, u64 pmi_window,
//                f64 pmi_threshold
//   epochs_run   u64, best_epoch u64
//   labels       u64 count, then per label: u64 length + bytes
//   vocabulary   u64 count, then per word: u64 length + bytes
//   doc freq     u64 n_train, then u64 df[count]
//   word degrees u64 count, then f64[count]
//   W0, W1, h1_word   each: u64 rows, u64 cols, f64[rows * cols] row-major

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "inductgcn/error.hpp"
#include "inductgcn/model.hpp"

namespace inductgcn {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::array<char, 8> kCheckpointMagic{'I', 'G', 'C', 'N', 'C', 'K', 'P', 'T'};

namespace detail {

class BinaryWriter {
public:
  explicit BinaryWriter(std::ostream &out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string &s) {
    u64(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void matrix(const DenseMatrix &m) {
    u64(m.rows());
    u64(m.cols());
    for (double v : m.values()) {
      f64(v);
    }
  }

private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) {
      out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  std::ostream &out_;
};

class BinaryReader {
public:
  explicit BinaryReader(std::istream &in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const auto n = length();
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  DenseMatrix matrix() {
    const auto rows = length();
    const auto cols = length();
    DenseMatrix m(rows, cols);
    for (double &v : m.values()) {
      v = f64();
    }
    return m;
  }
  // Counts are bounded so that a corrupt file fails fast instead of
  // attempting a huge allocation.
  std::size_t length() {
    const auto n = u64();
    if (n > (std::uint64_t{1} << 34)) {
      throw ParseError("checkpoint: implausible length " + std::to_string(n));
    }
    return static_cast<std::size_t>(n);
  }

private:
  std::uint64_t le(int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
      const int c = in_.get();
      if (c == std::char_traits<char>::eof()) {
        throw ParseError("checkpoint: unexpected end of file");
      }
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
  }
  void check() {
    if (!in_) {
      throw ParseError("checkpoint: unexpected end of file");
    }
  }
  std::istream &in_;
};

} // namespace detail

inline void write_checkpoint(const TrainedModel &model, std::ostream &out) {
  detail::BinaryWriter w(out);
  out.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.u32(kCheckpointVersion);
  w.u8(model.params.kind == ModelKind::gcn ? 0 : 1);
  w.u8(model.batch_normalization == BatchNormalization::symmetric ? 0 : 1);
  w.u8(model.lowercase ? 1 : 0);
  w.u64(model.min_train_frequency);

  const auto &c = model.config;
  w.u64(c.max_epochs);
  w.u64(c.patience);
  w.u64(c.hidden);
  w.f64(c.learning_rate);
  w.f64(c.dropout);
  w.f64(c.weight_decay);
  w.u64(c.seed);
  w.u64(c.pmi_window);
  w.f64(c.pmi_threshold);
  w.u64(model.epochs_run);
  w.u64(model.best_epoch);

  w.u64(model.labels.size());
  for (const auto &l : model.labels) {
    w.str(l);
  }
  w.u64(model.vocab.size());
  for (const auto &word : model.vocab.words()) {
    w.str(word);
  }
  w.u64(model.dfreq.n_train);
  for (auto df : model.dfreq.df) {
    w.u64(df);
  }
  w.u64(model.word_degrees.size());
  for (double d : model.word_degrees) {
    w.f64(d);
  }
  w.matrix(model.params.w0);
  w.matrix(model.params.w1);
  w.matrix(model.h1_word);
  if (!out) {
    throw Error("failed to write checkpoint");
  }
}

inline TrainedModel read_checkpoint(std::istream &in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kCheckpointMagic) {
    throw ParseError("not an inductgcn checkpoint");
  }
  detail::BinaryReader r(in);
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  }
  TrainedModel m;
  const auto kind = r.u8();
  if (kind > 1) {
    throw ParseError("checkpoint: unknown model kind " + std::to_string(kind));
  }
  m.params.kind = kind == 0 ? ModelKind::gcn : ModelKind::sgc;
  m.config.kind = m.params.kind;
  m.batch_normalization = r.u8() == 0 ? BatchNormalization::symmetric : BatchNormalization::none;
  m.lowercase = r.u8() != 0;
  m.min_train_frequency = r.u64();

  auto &c = m.config;
  c.max_epochs = r.u64();
  c.patience = r.u64();
  c.hidden = r.u64();
  c.learning_rate = r.f64();
  c.dropout = r.f64();
  c.weight_decay = r.f64();
  c.seed = r.u64();
  c.pmi_window = r.u64();
  c.pmi_threshold = r.f64();
  m.epochs_run = r.u64();
  m.best_epoch = r.u64();

  const auto n_labels = r.length();
  for (std::size_t i = 0; i < n_labels; ++i) {
    m.labels.push_back(r.str());
  }
  const auto n_words = r.length();
  for (std::size_t i = 0; i < n_words; ++i) {
    m.vocab.add(r.str());
  }
  if (m.vocab.size() != n_words) {
    throw ParseError("checkpoint: vocabulary contains duplicate words");
  }
  m.dfreq.n_train = r.u64();
  m.dfreq.df.resize(n_words);
  for (auto &df : m.dfreq.df) {
    df = r.u64();
  }
  const auto n_degrees = r.length();
  m.word_degrees.resize(n_degrees);
  for (double &d : m.word_degrees) {
    d = r.f64();
  }
  m.params.w0 = r.matrix();
  m.params.w1 = r.matrix();
  m.h1_word = r.matrix();

  const bool gcn = m.params.kind == ModelKind::gcn;
  if (n_degrees != n_words || m.params.w0.rows() != n_words || m.h1_word.rows() != n_words ||
      m.params.classes() != n_labels || (gcn && m.params.w1.rows() != m.params.w0.cols()) ||
      m.h1_word.cols() != m.params.w0.cols() || (!gcn && m.params.w1.size() != 0)) {
    throw ParseError("checkpoint: inconsistent dimensions");
  }
  return m;
}

inline std::string serialize(const TrainedModel &model) {
  std::ostringstream out(std::ios::binary);
  write_checkpoint(model, out);
  return std::move(out).str();
}

inline TrainedModel deserialize(const std::string &bytes) {
  std::istringstream in(bytes, std::ios::binary);
  return read_checkpoint(in);
}

inline void save_checkpoint(const TrainedModel &model, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write checkpoint " + path);
  }
  write_checkpoint(model, out);
}

inline TrainedModel load_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open checkpoint " + path);
  }
  return read_checkpoint(in);
}

} // namespace inductgcn
