#include "fgbp/ldpc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "fgbp/bp.hpp"
#include "fgbp/rng.hpp"

namespace fgbp {
namespace {

std::vector<std::vector<int>> random_regular_checks(int n, int dv, int dc,
                                                    Rng& rng) {
  const int edges = n * dv;
  const int m = edges / dc;
  std::vector<int> sockets(edges);
  for (int i = 0; i < edges; ++i) sockets[i] = i / dv;
  // Fisher-Yates on the variable sockets.
  for (int i = edges - 1; i > 0; --i) {
    std::swap(sockets[i], sockets[rng.uniform_int(i + 1)]);
  }
  // Repair duplicate edges by swapping an offending socket with a random one
  // until every check sees distinct variables.
  for (int attempt = 0; attempt < 20000; ++attempt) {
    int bad = -1;
    for (int c = 0; c < m && bad < 0; ++c) {
      for (int a = 0; a < dc && bad < 0; ++a) {
        for (int b = a + 1; b < dc; ++b) {
          if (sockets[c * dc + a] == sockets[c * dc + b]) {
            bad = c * dc + b;
            break;
          }
        }
      }
    }
    if (bad < 0) {
      std::vector<std::vector<int>> checks(m);
      for (int c = 0; c < m; ++c) {
        checks[c].assign(sockets.begin() + c * dc,
                         sockets.begin() + (c + 1) * dc);
        std::sort(checks[c].begin(), checks[c].end());
      }
      return checks;
    }
    std::swap(sockets[bad], sockets[rng.uniform_int(edges)]);
  }
  throw std::runtime_error("ldpc: could not remove duplicate edges");
}

// Reduced row echelon form over GF(2); fills the systematic encoder fields.
// Returns false when H is rank deficient.
bool build_encoder(LdpcCode& code) {
  const int n = code.n, m = code.m;
  std::vector<std::vector<std::uint8_t>> row(
      m, std::vector<std::uint8_t>(n, 0));
  for (int c = 0; c < m; ++c) {
    for (int col : code.check_cols[c]) row[c][col] = 1;
  }

  std::vector<int> pivot_cols;
  int r = 0;
  for (int col = 0; col < n && r < m; ++col) {
    int pivot = -1;
    for (int i = r; i < m; ++i) {
      if (row[i][col]) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    std::swap(row[r], row[pivot]);
    for (int i = 0; i < m; ++i) {
      if (i != r && row[i][col]) {
        for (int j = col; j < n; ++j) row[i][j] ^= row[r][j];
      }
    }
    pivot_cols.push_back(col);
    ++r;
  }
  if (r < m) return false;

  std::vector<std::uint8_t> is_pivot(n, 0);
  for (int col : pivot_cols) is_pivot[col] = 1;
  code.info_positions.clear();
  for (int col = 0; col < n; ++col) {
    if (!is_pivot[col]) code.info_positions.push_back(col);
  }
  code.parity_positions = pivot_cols;
  code.parity_rows.assign(m, {});
  for (int i = 0; i < m; ++i) {
    code.parity_rows[i].resize(code.info_positions.size());
    for (std::size_t j = 0; j < code.info_positions.size(); ++j) {
      code.parity_rows[i][j] = row[i][code.info_positions[j]];
    }
  }
  return true;
}

double symbol(int bit, Modulation mod) {
  return mod == Modulation::kBpsk ? (bit == 0 ? 1.0 : -1.0)
                                  : static_cast<double>(bit);
}

double snr_sigma(int snr_db) { return std::pow(10.0, -snr_db / 20.0); }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

LdpcCode ldpc_make_code(int n, int dv, int dc, std::uint64_t seed) {
  if (n <= 0 || dv <= 0 || dc <= 0 || (n * dv) % dc != 0) {
    throw std::invalid_argument("ldpc: n*dv must be divisible by dc");
  }
  Rng rng(seed);
  for (int redraw = 0; redraw < 100; ++redraw) {
    LdpcCode code;
    code.n = n;
    code.m = n * dv / dc;
    code.check_cols = random_regular_checks(n, dv, dc, rng);
    if (build_encoder(code)) return code;
  }
  throw std::runtime_error("ldpc: rank deficient after max redraws");
}

std::vector<int> ldpc_encode(const LdpcCode& code,
                             const std::vector<int>& message) {
  if (static_cast<int>(message.size()) != code.message_length()) {
    throw std::invalid_argument("ldpc: wrong message length");
  }
  std::vector<int> word(code.n, 0);
  for (std::size_t j = 0; j < message.size(); ++j) {
    word[code.info_positions[j]] = message[j] & 1;
  }
  for (int r = 0; r < code.m; ++r) {
    int parity = 0;
    for (std::size_t j = 0; j < message.size(); ++j) {
      parity ^= code.parity_rows[r][j] & message[j];
    }
    word[code.parity_positions[r]] = parity;
  }
  return word;
}

bool ldpc_check(const LdpcCode& code, const std::vector<int>& codeword) {
  for (const auto& cols : code.check_cols) {
    int parity = 0;
    for (int col : cols) parity ^= codeword[col] & 1;
    if (parity) return false;
  }
  return true;
}

std::string alist_write(const LdpcCode& code) {
  std::vector<std::vector<int>> col_rows(code.n);
  for (int c = 0; c < code.m; ++c) {
    for (int col : code.check_cols[c]) col_rows[col].push_back(c);
  }
  std::size_t max_col = 0, max_row = 0;
  for (const auto& v : col_rows) max_col = std::max(max_col, v.size());
  for (const auto& v : code.check_cols) max_row = std::max(max_row, v.size());

  std::ostringstream out;
  out << code.n << ' ' << code.m << '\n';
  out << max_col << ' ' << max_row << '\n';
  for (int i = 0; i < code.n; ++i) {
    out << col_rows[i].size() << (i + 1 < code.n ? ' ' : '\n');
  }
  for (int i = 0; i < code.m; ++i) {
    out << code.check_cols[i].size() << (i + 1 < code.m ? ' ' : '\n');
  }
  for (int i = 0; i < code.n; ++i) {
    for (std::size_t j = 0; j < max_col; ++j) {
      const int v = j < col_rows[i].size() ? col_rows[i][j] + 1 : 0;
      out << v << (j + 1 < max_col ? ' ' : '\n');
    }
  }
  for (int i = 0; i < code.m; ++i) {
    for (std::size_t j = 0; j < max_row; ++j) {
      const int v = j < code.check_cols[i].size() ? code.check_cols[i][j] + 1 : 0;
      out << v << (j + 1 < max_row ? ' ' : '\n');
    }
  }
  return out.str();
}

LdpcCode alist_read(const std::string& text) {
  std::istringstream in(text);
  LdpcCode code;
  std::size_t max_col = 0, max_row = 0;
  if (!(in >> code.n >> code.m >> max_col >> max_row)) {
    throw std::runtime_error("alist: truncated header");
  }
  std::vector<std::size_t> col_w(code.n), row_w(code.m);
  for (auto& w : col_w) in >> w;
  for (auto& w : row_w) in >> w;
  for (int i = 0; i < code.n; ++i) {
    for (std::size_t j = 0; j < max_col; ++j) {
      int v;
      in >> v;
    }
  }
  code.check_cols.assign(code.m, {});
  for (int i = 0; i < code.m; ++i) {
    for (std::size_t j = 0; j < max_row; ++j) {
      int v;
      if (!(in >> v)) throw std::runtime_error("alist: truncated row list");
      if (j < row_w[i]) {
        if (v <= 0 || v > code.n) throw std::runtime_error("alist: bad column");
        code.check_cols[i].push_back(v - 1);
      }
    }
    std::sort(code.check_cols[i].begin(), code.check_cols[i].end());
  }
  if (!build_encoder(code)) {
    throw std::runtime_error("alist: rank-deficient parity matrix");
  }
  return code;
}

ChannelSample ldpc_channel_sample(const LdpcCode& code, int snr_db,
                                  double sigma_b, std::uint64_t seed,
                                  Modulation mod) {
  Rng rng(seed);
  std::vector<int> message(code.message_length());
  for (int& b : message) b = rng.uniform_int(2);

  ChannelSample sample;
  sample.bits = ldpc_encode(code, message);
  sample.snr_db = snr_db;
  sample.sigma_b = sigma_b;
  const double sigma = snr_sigma(snr_db);
  sample.noisy.resize(code.n);
  for (int i = 0; i < code.n; ++i) {
    const double noise = rng.gaussian() * sigma;
    const double eta = rng.uniform();
    const double burst = rng.gaussian() * sigma_b;
    sample.noisy[i] =
        symbol(sample.bits[i], mod) + noise + (eta <= 0.05 ? burst : 0.0);
  }
  return sample;
}

FactorGraph ldpc_decoding_graph(const LdpcCode& code,
                                const std::vector<double>& noisy, int snr_db,
                                Modulation mod) {
  const double sigma = snr_sigma(snr_db);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  std::vector<VariableNode> vars;
  vars.reserve(code.n);
  for (int i = 0; i < code.n; ++i) vars.push_back({i, 2});

  std::vector<FactorNode> factors;
  int next_id = 0;
  for (int i = 0; i < code.n; ++i) {
    const double d0 = noisy[i] - symbol(0, mod);
    const double d1 = noisy[i] - symbol(1, mod);
    DenseTensor t({2}, {-d0 * d0 * inv, -d1 * d1 * inv});
    factors.push_back({next_id++, {i}, DenseLogPotential{std::move(t)}});
  }
  for (const auto& cols : code.check_cols) {
    factors.push_back({next_id++, cols, ParityPotential{}});
  }
  return build_graph(std::move(vars), std::move(factors));
}

std::vector<int> ldpc_decode(const LdpcCode& code,
                             const std::vector<double>& noisy, int snr_db,
                             const std::string& decoder, Modulation mod) {
  std::vector<int> bits(code.n, 0);
  if (decoder == "bit") {
    for (int i = 0; i < code.n; ++i) {
      if (mod == Modulation::kBpsk) {
        bits[i] = noisy[i] < 0.0 ? 1 : 0;
      } else {
        bits[i] = noisy[i] > 0.5 ? 1 : 0;
      }
    }
    return bits;
  }
  BpConfig cfg;
  if (decoder == "sum") {
    cfg.mode = BpMode::kSumProduct;
  } else if (decoder == "max") {
    cfg.mode = BpMode::kMaxSum;
  } else {
    throw std::invalid_argument("unknown decoder: " + decoder);
  }
  const auto g = ldpc_decoding_graph(code, noisy, snr_db, mod);
  const auto result = run_bp(g, cfg);
  const Assignment decode = decode_map_from_beliefs(result.beliefs);
  for (int i = 0; i < code.n; ++i) bits[i] = decode[i];
  return bits;
}

std::vector<BerRow> ldpc_decode_eval(const LdpcCode& code,
                                     const std::vector<std::string>& decoders,
                                     const std::vector<int>& snr_grid,
                                     const std::vector<double>& sigma_b_grid,
                                     int trials, std::uint64_t seed,
                                     Modulation mod) {
  Rng root(seed);
  std::vector<BerRow> rows;
  std::uint64_t trial_index = 0;
  for (int snr : snr_grid) {
    for (double sb : sigma_b_grid) {
      std::vector<BerRow> cell;
      for (const auto& name : decoders) {
        BerRow row;
        row.snr_db = snr;
        row.sigma_b = sb;
        row.decoder = name;
        row.trials = trials;
        cell.push_back(std::move(row));
      }
      for (int t = 0; t < trials; ++t) {
        const std::uint64_t s = root.child(trial_index++).next_u64();
        const auto sample = ldpc_channel_sample(code, snr, sb, s, mod);
        for (std::size_t d = 0; d < decoders.size(); ++d) {
          const auto bits =
              ldpc_decode(code, sample.noisy, snr, decoders[d], mod);
          for (int i = 0; i < code.n; ++i) {
            cell[d].bit_errors += bits[i] != sample.bits[i];
          }
        }
      }
      for (auto& row : cell) {
        row.ber = static_cast<double>(row.bit_errors) /
                  (static_cast<double>(row.trials) * code.n);
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string ber_rows_to_csv(const std::vector<BerRow>& rows) {
  std::ostringstream out;
  out << "snr_db,sigma_b,decoder,trials,bit_errors,ber\n";
  for (const auto& row : rows) {
    out << row.snr_db << ',' << format_number(row.sigma_b) << ','
        << row.decoder << ',' << row.trials << ',' << row.bit_errors << ','
        << format_number(row.ber) << '\n';
  }
  return out.str();
}

}  // namespace fgbp
