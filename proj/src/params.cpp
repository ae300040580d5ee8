#include "adwords/params.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace adwords {

namespace {

Rat half() { return Rat(1, 2); }

// dx(k) of the basic table: 1/2 for k=1, 2^-k (1-g)^(k-2) (1+g) for k>=2.
Rat basic_dx(const Rat& g, int k) {
  if (k <= 0) return Rat(0);
  if (k == 1) return half();
  Rat one_minus = Rat(1) - g;
  return Rat::pow(half(), static_cast<unsigned>(k)) *
         Rat::pow(one_minus, static_cast<unsigned>(k - 2)) * (Rat(1) + g);
}

// sum_{l >= k} basic_dx(l) = 2^{-k+1} (1-g)^{k-2} for k >= 2; 1 for k <= 1.
Rat basic_dx_tail(const Rat& g, int k) {
  if (k <= 1) return Rat(1);
  return Rat::pow(half(), static_cast<unsigned>(k - 1)) *
         Rat::pow(Rat(1) - g, static_cast<unsigned>(k - 2));
}

}  // namespace

BasicTable BasicTable::closed_form(const Rat& gamma) {
  BasicTable t;
  t.gamma_ = gamma;
  t.kmax_ = 0;
  t.big_gamma_ = (Rat(3) + Rat(2) * gamma) / (Rat(6) + Rat(3) * gamma);
  return t;
}

BasicTable BasicTable::closed_form_truncated(const Rat& gamma, int kmax) {
  if (kmax < 1) throw std::invalid_argument("kmax must be >= 1");
  BasicTable closed = closed_form(gamma);
  std::vector<Rat> da(static_cast<std::size_t>(kmax) + 1);
  std::vector<Rat> db(static_cast<std::size_t>(kmax) + 1);
  for (int k = 1; k <= kmax; ++k) {
    da[static_cast<std::size_t>(k)] = closed.dalpha(k);
    db[static_cast<std::size_t>(k)] = closed.dbeta(k);
  }
  Rat penalty = basic_dx_tail(gamma, kmax + 1);
  return from_rows(gamma, kmax, closed.big_gamma() - penalty, std::move(da),
                   std::move(db));
}

BasicTable BasicTable::from_rows(const Rat& gamma, int kmax,
                                 const Rat& big_gamma, std::vector<Rat> dalpha,
                                 std::vector<Rat> dbeta) {
  BasicTable t;
  t.gamma_ = gamma;
  t.kmax_ = kmax;
  t.big_gamma_ = big_gamma;
  t.dalpha_ = std::move(dalpha);
  t.dbeta_ = std::move(dbeta);
  t.dalpha_suffix_.assign(static_cast<std::size_t>(kmax) + 2, Rat(0));
  t.dbeta_suffix_.assign(static_cast<std::size_t>(kmax) + 2, Rat(0));
  for (int k = kmax; k >= 1; --k) {
    auto i = static_cast<std::size_t>(k);
    t.dalpha_suffix_[i] = t.dalpha_suffix_[i + 1] + t.dalpha_[i];
    t.dbeta_suffix_[i] = t.dbeta_suffix_[i + 1] + t.dbeta_[i];
  }
  return t;
}

Rat BasicTable::dx(int k) const {
  if (k < 1 || (kmax_ != 0 && k > kmax_)) return Rat(0);
  return basic_dx(gamma_, k);
}

Rat BasicTable::dalpha(int k) const {
  if (k < 1) return Rat(0);
  if (kmax_ != 0) {
    if (k > kmax_) return Rat(0);
    return dalpha_[static_cast<std::size_t>(k)];
  }
  if (k == 1)
    return (Rat(3) + gamma_) / (Rat(6) + Rat(3) * gamma_) * basic_dx(gamma_, 1);
  return (Rat(1) + gamma_) / (Rat(2) + gamma_) * basic_dx(gamma_, k);
}

Rat BasicTable::dbeta(int k) const {
  if (k < 1) return Rat(0);
  if (kmax_ != 0) {
    if (k > kmax_) return Rat(0);
    return dbeta_[static_cast<std::size_t>(k)];
  }
  return dx(k) - dalpha(k);
}

Rat BasicTable::dx_tail(int k) const {
  if (kmax_ == 0) return basic_dx_tail(gamma_, std::max(k, 1));
  Rat sum(0);
  for (int l = std::max(k, 1); l <= kmax_; ++l) sum += dx(l);
  return sum;
}

Rat BasicTable::dalpha_tail(int k) const {
  k = std::max(k, 1);
  if (kmax_ != 0)
    return k > kmax_ ? Rat(0) : dalpha_suffix_[static_cast<std::size_t>(k)];
  // Closed form: da(1) special, geometric beyond.
  Rat tail2 = (Rat(1) + gamma_) / (Rat(2) + gamma_) * basic_dx_tail(gamma_, 2);
  if (k == 1) return dalpha(1) + tail2;
  return (Rat(1) + gamma_) / (Rat(2) + gamma_) * basic_dx_tail(gamma_, k);
}

Rat BasicTable::dbeta_tail(int k) const {
  k = std::max(k, 1);
  if (kmax_ != 0)
    return k > kmax_ ? Rat(0) : dbeta_suffix_[static_cast<std::size_t>(k)];
  Rat tail2 = Rat(1) / (Rat(2) + gamma_) * basic_dx_tail(gamma_, 2);
  if (k == 1) return dbeta(1) + tail2;
  return Rat(1) / (Rat(2) + gamma_) * basic_dx_tail(gamma_, k);
}

Rat BasicTable::alpha_prefix(int k) const {
  if (k < 1) return Rat(0);
  return dalpha_tail(1) - dalpha_tail(k + 1);
}

Rat HybridTable::dx_left_semi(int k) { return Rat::pow(half(), static_cast<unsigned>(k)); }

Rat HybridTable::dx_left_det(int k) {
  return Rat::pow(half(), static_cast<unsigned>(k - 1));
}

Rat HybridTable::dx_right_semi_small(const Rat& gamma, int k) {
  if (k == 1) return half() - gamma / Rat(4);
  return Rat::pow(half(), static_cast<unsigned>(k)) *
         Rat::pow(Rat(1) - gamma, static_cast<unsigned>(k - 2));
}

Rat HybridTable::dx_right_semi_large(const Rat& gamma, int k) {
  if (k == 1) return half();
  return Rat::pow(half(), static_cast<unsigned>(k)) *
         Rat::pow(Rat(1) - gamma, static_cast<unsigned>(k - 2)) *
         (Rat(1) + gamma);
}

Rat HybridTable::dx_right_det(const Rat& gamma, int k) {
  if (k == 1) return Rat(1);  // a fresh point rises from 0 to 1
  return Rat::pow(half(), static_cast<unsigned>(k - 1)) *
         Rat::pow(Rat(1) - gamma, static_cast<unsigned>(k - 2));
}

namespace {
Rat row_at(const std::vector<Rat>& row, int k) {
  if (k < 1 || k >= static_cast<int>(row.size())) return Rat(0);
  return row[static_cast<std::size_t>(k)];
}
}  // namespace

Rat HybridTable::dalpha_semi(Side side, int k) const {
  return row_at(side == Side::kLeft ? da_l_r : da_r_r, k);
}

Rat HybridTable::dalpha_det(Side side, int k) const {
  return row_at(side == Side::kLeft ? da_l_d : da_r_d, k);
}

Rat HybridTable::dbeta_semi(Side side, BidClass cls, int k) const {
  if (side == Side::kLeft) return row_at(db_l_r, k);
  return row_at(cls == BidClass::kLarge ? db_r_rl : db_r_rs, k);
}

Rat HybridTable::dbeta_det(Side side, int k) const {
  return row_at(side == Side::kLeft ? db_l_d : db_r_d, k);
}

Rat HybridTable::dx_semi(Side side, BidClass cls, int k) const {
  if (k < 1 || k > kmax) return Rat(0);
  if (side == Side::kLeft) return dx_left_semi(k);
  return cls == BidClass::kLarge ? dx_right_semi_large(gamma, k)
                                 : dx_right_semi_small(gamma, k);
}

Rat HybridTable::dx_det(Side side, int k) const {
  if (k < 1 || k > kmax) return Rat(0);
  return side == Side::kLeft ? dx_left_det(k) : dx_right_det(gamma, k);
}

Rat panocs_large_gamma(const Rat& p) {
  return Rat(1, 4) * (Rat(1) - p) * p * (Rat(1) - Rat(3, 8) * p);
}

Rat panocs_general_gamma_exact(const Rat& p, int kmax) {
  Rat base = Rat(1) - p / Rat(4 * kmax);
  Rat inner = Rat(1) - Rat::pow(base, static_cast<unsigned>(4 * kmax));
  return Rat(1, 16 * kmax) * (Rat(1) - p) * inner;
}

double panocs_general_gamma_lower(double p, int kmax) {
  return (1.0 - p) * (-std::expm1(-p)) / (16.0 * kmax);
}

namespace {

nlohmann::ordered_json rows_json(const std::vector<Rat>& row) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (std::size_t k = 1; k < row.size(); ++k) arr.push_back(row[k].to_string());
  return arr;
}

std::vector<Rat> rows_from_json(const nlohmann::json& arr, int kmax) {
  std::vector<Rat> row(static_cast<std::size_t>(kmax) + 1, Rat(0));
  for (int k = 1; k <= kmax; ++k)
    row[static_cast<std::size_t>(k)] =
        Rat::parse(arr.at(static_cast<std::size_t>(k - 1)).get<std::string>());
  return row;
}

}  // namespace

std::string table_to_json(const BasicTable& table) {
  nlohmann::ordered_json j;
  j["mode"] = table.infinite() ? "basic-closed" : "basic";
  j["gamma"] = table.gamma().to_string();
  j["Gamma"] = table.big_gamma().to_string();
  if (!table.infinite()) {
    j["kmax"] = table.kmax();
    nlohmann::ordered_json da = nlohmann::ordered_json::array();
    nlohmann::ordered_json db = nlohmann::ordered_json::array();
    for (int k = 1; k <= table.kmax(); ++k) {
      da.push_back(table.dalpha(k).to_string());
      db.push_back(table.dbeta(k).to_string());
    }
    j["rows"] = {{"dalpha", std::move(da)}, {"dbeta", std::move(db)}};
  }
  return j.dump(2) + "\n";
}

std::string table_to_json(const HybridTable& table) {
  nlohmann::ordered_json j;
  j["mode"] = "hybrid";
  j["gamma"] = table.gamma.to_string();
  j["kmax"] = table.kmax;
  j["Gamma"] = table.big_gamma.to_string();
  j["rows"] = {{"dalpha_L_R", rows_json(table.da_l_r)},
               {"dalpha_R_R", rows_json(table.da_r_r)},
               {"dalpha_L_D", rows_json(table.da_l_d)},
               {"dalpha_R_D", rows_json(table.da_r_d)},
               {"dbeta_L_R", rows_json(table.db_l_r)},
               {"dbeta_R_RS", rows_json(table.db_r_rs)},
               {"dbeta_R_RL", rows_json(table.db_r_rl)},
               {"dbeta_L_D", rows_json(table.db_l_d)},
               {"dbeta_R_D", rows_json(table.db_r_d)}};
  return j.dump(2) + "\n";
}

bool json_table_is_hybrid(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  return j.at("mode").get<std::string>() == "hybrid";
}

BasicTable basic_table_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::string mode = j.at("mode").get<std::string>();
  Rat gamma = Rat::parse(j.at("gamma").get<std::string>());
  if (mode == "basic-closed") return BasicTable::closed_form(gamma);
  if (mode != "basic") throw std::runtime_error("not a basic table: " + mode);
  int kmax = j.at("kmax").get<int>();
  Rat big_gamma = Rat::parse(j.at("Gamma").get<std::string>());
  std::vector<Rat> da(static_cast<std::size_t>(kmax) + 1, Rat(0));
  std::vector<Rat> db(static_cast<std::size_t>(kmax) + 1, Rat(0));
  for (int k = 1; k <= kmax; ++k) {
    da[static_cast<std::size_t>(k)] = Rat::parse(
        j.at("rows").at("dalpha").at(static_cast<std::size_t>(k - 1)).get<std::string>());
    db[static_cast<std::size_t>(k)] = Rat::parse(
        j.at("rows").at("dbeta").at(static_cast<std::size_t>(k - 1)).get<std::string>());
  }
  return BasicTable::from_rows(gamma, kmax, big_gamma, std::move(da),
                               std::move(db));
}

HybridTable hybrid_table_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (j.at("mode").get<std::string>() != "hybrid")
    throw std::runtime_error("not a hybrid table");
  HybridTable t;
  t.gamma = Rat::parse(j.at("gamma").get<std::string>());
  t.kmax = j.at("kmax").get<int>();
  t.big_gamma = Rat::parse(j.at("Gamma").get<std::string>());
  const auto& rows = j.at("rows");
  t.da_l_r = rows_from_json(rows.at("dalpha_L_R"), t.kmax);
  t.da_r_r = rows_from_json(rows.at("dalpha_R_R"), t.kmax);
  t.da_l_d = rows_from_json(rows.at("dalpha_L_D"), t.kmax);
  t.da_r_d = rows_from_json(rows.at("dalpha_R_D"), t.kmax);
  t.db_l_r = rows_from_json(rows.at("dbeta_L_R"), t.kmax);
  t.db_r_rs = rows_from_json(rows.at("dbeta_R_RS"), t.kmax);
  t.db_r_rl = rows_from_json(rows.at("dbeta_R_RL"), t.kmax);
  t.db_l_d = rows_from_json(rows.at("dbeta_L_D"), t.kmax);
  t.db_r_d = rows_from_json(rows.at("dbeta_R_D"), t.kmax);
  return t;
}

}  // namespace adwords
