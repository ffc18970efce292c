#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fgbp/graph.hpp"

namespace fgbp {

struct LdpcCode {
  int n = 0;  // block length
  int m = 0;  // checks
  std::vector<std::vector<int>> check_cols;  // per check, ascending columns
  // Systematic encoder: codeword[info_positions] = message;
  // codeword[parity_positions[r]] = parity of message bits selected by
  // parity_rows[r] (bit j of row r set -> message bit j participates).
  std::vector<int> info_positions;
  std::vector<int> parity_positions;
  std::vector<std::vector<std::uint8_t>> parity_rows;

  int message_length() const { return n - m; }
};

// Random (dv, dc)-regular code via socket matching without duplicate edges;
// the systematic encoder comes from GF(2) elimination, redrawing the graph
// when H is rank deficient. Requires n * dv divisible by dc.
LdpcCode ldpc_make_code(int n, int dv, int dc, std::uint64_t seed);

std::vector<int> ldpc_encode(const LdpcCode& code, const std::vector<int>& message);
bool ldpc_check(const LdpcCode& code, const std::vector<int>& codeword);

std::string alist_write(const LdpcCode& code);
// Reads H only; the encoder is rebuilt by elimination on the parsed matrix.
LdpcCode alist_read(const std::string& text);

enum class Modulation { kBpsk, kBit };

struct ChannelSample {
  std::vector<int> bits;      // clean codeword
  std::vector<double> noisy;  // received reals
  int snr_db = 0;
  double sigma_b = 0.0;
};

// y_i = s(b_i) + n_i + 1[eta_i <= 0.05] z_i with n ~ N(0, sigma^2),
// z ~ N(0, sigma_b^2), sigma = 10^(-snr_db/20); s is +/-1 for BPSK or the
// raw bit for kBit.
ChannelSample ldpc_channel_sample(const LdpcCode& code, int snr_db,
                                  double sigma_b, std::uint64_t seed,
                                  Modulation mod = Modulation::kBpsk);

// Factor graph for one received word: Gaussian-likelihood unaries with the
// snr-derived sigma plus one parity factor per check.
FactorGraph ldpc_decoding_graph(const LdpcCode& code,
                                const std::vector<double>& noisy, int snr_db,
                                Modulation mod = Modulation::kBpsk);

std::vector<int> ldpc_decode(const LdpcCode& code,
                             const std::vector<double>& noisy, int snr_db,
                             const std::string& decoder,
                             Modulation mod = Modulation::kBpsk);

struct BerRow {
  int snr_db = 0;
  double sigma_b = 0.0;
  std::string decoder;
  int trials = 0;
  long long bit_errors = 0;
  double ber = 0.0;
};

std::vector<BerRow> ldpc_decode_eval(const LdpcCode& code,
                                     const std::vector<std::string>& decoders,
                                     const std::vector<int>& snr_grid,
                                     const std::vector<double>& sigma_b_grid,
                                     int trials, std::uint64_t seed,
                                     Modulation mod = Modulation::kBpsk);

std::string ber_rows_to_csv(const std::vector<BerRow>& rows);

}  // namespace fgbp
