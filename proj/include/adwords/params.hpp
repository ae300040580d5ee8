#pragma once

#include <string>
#include <vector>

#include "adwords/panorama.hpp"
#include "adwords/rational.hpp"

namespace adwords {

/// Increment table for the basic primal-dual allocator: the Delta x / alpha /
/// beta sequences. Either the closed-form infinite table (kmax == 0) or a
/// finite truncated one (entries zero beyond kmax). All entries exact.
class BasicTable {
 public:
  /// Closed-form solution of the factor LP at this gamma:
  ///   Gamma = (3+2g)/(6+3g),
  ///   da(1) = (3+g)/(6+3g) * dx(1),  da(k) = (1+g)/(2+g) * dx(k),
  /// with dx(1) = 1/2, dx(k) = 2^-k (1-g)^(k-2) (1+g).
  static BasicTable closed_form(const Rat& gamma);

  /// Same sequences truncated at kmax with
  /// Gamma reduced by 2^-kmax (1-g)^(kmax-1).
  static BasicTable closed_form_truncated(const Rat& gamma, int kmax);

  /// Finite table with explicit rows (used by the LP export path).
  static BasicTable from_rows(const Rat& gamma, int kmax, const Rat& big_gamma,
                              std::vector<Rat> dalpha, std::vector<Rat> dbeta);

  bool infinite() const { return kmax_ == 0; }
  int kmax() const { return kmax_; }
  const Rat& gamma() const { return gamma_; }
  const Rat& big_gamma() const { return big_gamma_; }

  Rat dx(int k) const;
  Rat dalpha(int k) const;
  Rat dbeta(int k) const;

  Rat dx_tail(int k) const;      // sum_{l >= k} dx(l)
  Rat dalpha_tail(int k) const;  // sum_{l >= k} dalpha(l)
  Rat dbeta_tail(int k) const;   // sum_{l >= k} dbeta(l)
  Rat alpha_prefix(int k) const;  // sum_{l <= k} dalpha(l)
  Rat alpha_total() const { return dalpha_tail(1); }

 private:
  Rat gamma_;
  Rat big_gamma_;
  int kmax_ = 0;  // 0 == infinite closed form
  // Finite mode only:
  std::vector<Rat> dalpha_, dbeta_;          // 1-indexed, [0] unused
  std::vector<Rat> dalpha_suffix_, dbeta_suffix_;
};

enum class Side { kLeft, kRight };
enum class BidClass { kSmall, kLarge };

/// Is the bid large for this budget? Frozen as 2b >= B everywhere (arc rule,
/// k_large counting, and the hybrid beta-row split all agree).
inline bool is_large_bid(Value bid, Value budget) { return 2 * bid >= budget; }

/// The ten hybrid sequences plus Gamma, truncated at kmax. The Delta x
/// constants are fixed functions of gamma; beta rows satisfy
/// dbeta = dx - dalpha exactly by construction of the exporter.
struct HybridTable {
  Rat gamma;
  int kmax = 0;
  Rat big_gamma;

  // 1-indexed rows, size kmax+1, index 0 unused; zero beyond kmax.
  std::vector<Rat> da_l_r, da_r_r, da_l_d, da_r_d;
  std::vector<Rat> db_l_r, db_r_rs, db_r_rl, db_l_d, db_r_d;

  Rat dalpha_semi(Side side, int k) const;
  Rat dalpha_det(Side side, int k) const;  // det after k-1 semis
  Rat dbeta_semi(Side side, BidClass cls, int k) const;
  Rat dbeta_det(Side side, int k) const;
  Rat dx_semi(Side side, BidClass cls, int k) const;
  Rat dx_det(Side side, int k) const;

  // The primal-increment constants (zero beyond kmax).
  static Rat dx_left_semi(int k);
  static Rat dx_left_det(int k);
  static Rat dx_right_semi_small(const Rat& gamma, int k);
  static Rat dx_right_semi_large(const Rat& gamma, int k);
  static Rat dx_right_det(const Rat& gamma, int k);
};

/// PanOCS guarantee constants.
Rat panocs_large_gamma(const Rat& sender_p);           // (1/4)(1-p)p(1-3p/8)
Rat panocs_general_gamma_exact(const Rat& sender_p, int kmax);
// (1/(16k))(1-p)(1-(1-p/4k)^(4k))
double panocs_general_gamma_lower(double sender_p, int kmax);
// (1/(16k))(1-p)(1-e^-p)

inline Rat default_large_sender_p() { return Rat(4, 9); }
inline Rat default_general_sender_p() { return Rat(44285, 100000); }
inline Rat frozen_large_gamma() { return Rat(643, 12500); }  // 0.05144

std::string table_to_json(const BasicTable& table);
std::string table_to_json(const HybridTable& table);
BasicTable basic_table_from_json(const std::string& text);
HybridTable hybrid_table_from_json(const std::string& text);
bool json_table_is_hybrid(const std::string& text);

}  // namespace adwords
