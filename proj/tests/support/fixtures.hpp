#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "../oracles/naive_ranker.hpp"
#include "qa/discriminator.hpp"
#include "qa/ranker.hpp"
#include "qa/rng.hpp"

namespace fixtures {

inline oracle::Mat to_mat(const qa::Matrix& m) {
  oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  }
  return out;
}

inline oracle::Vec to_vec(const qa::Matrix& m) {
  auto v = m.values();
  return oracle::Vec(v.begin(), v.end());
}

inline oracle::NaiveParams to_naive(const qa::ranker::RankerParams& p) {
  oracle::NaiveParams n;
  n.w_proj = to_mat(p.w_proj.value);
  n.b_proj = to_vec(p.b_proj.value);
  n.w_k = to_mat(p.w_k.value);
  n.b_k = to_vec(p.b_k.value);
  n.w_v = to_mat(p.w_v.value);
  n.b_v = to_vec(p.b_v.value);
  n.w_p = to_vec(p.w_p.value);
  n.b_p = p.b_p.value(0, 0);
  n.w_h1 = to_mat(p.w_h1.value);
  n.b_h1 = to_vec(p.b_h1.value);
  n.w_h2 = to_vec(p.w_h2.value);
  n.b_h2 = p.b_h2.value(0, 0);
  return n;
}

inline std::vector<oracle::Mat> candidate_mats(const qa::ranker::QuestionInstance& inst) {
  std::vector<oracle::Mat> out;
  for (const auto& c : inst.candidates) out.push_back(to_mat(c.values));
  return out;
}

inline std::vector<qa::disc::DiscriminatorId> rows_for(std::size_t k) {
  static const std::vector<qa::disc::DiscriminatorId> all{qa::disc::kTfd, qa::disc::kDrd,
                                                          qa::disc::kAvd};
  std::vector<qa::disc::DiscriminatorId> out;
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(i < all.size() ? all[i] : qa::disc::DiscriminatorId("x" + std::to_string(i)));
  }
  return out;
}

/// Score matrix with uniform [0,1] entries and strictly decreasing lexical scores.
inline qa::disc::ScoreMatrix random_matrix(qa::Rng& rng, const std::string& qid, std::size_t cand,
                                           std::size_t k, std::size_t n) {
  qa::disc::ScoreMatrix m;
  m.question_id = qid;
  m.candidate_index = cand;
  m.row_ids = rows_for(k);
  m.values = qa::Matrix(k, n);
  for (std::size_t j = 0; j < n; ++j) {
    m.doc_ids.push_back(qid + "-" + std::to_string(cand) + "-" + std::to_string(j));
    m.lexical.push_back(static_cast<double>(n - j));
    for (std::size_t r = 0; r < k; ++r) m.values(r, j) = rng.uniform();
  }
  return m;
}

/// n_per_candidate[c] documents for candidate c.
inline qa::ranker::QuestionInstance random_instance(qa::Rng& rng, const std::string& qid,
                                                    std::size_t k,
                                                    const std::vector<std::size_t>& n_per_candidate) {
  qa::ranker::QuestionInstance inst;
  inst.question_id = qid;
  inst.answer_index = rng.below(n_per_candidate.size());
  for (std::size_t c = 0; c < n_per_candidate.size(); ++c) {
    inst.candidates.push_back(random_matrix(rng, qid, c, k, n_per_candidate[c]));
  }
  return inst;
}

inline qa::ranker::RankerConfig small_config(std::size_t k) {
  qa::ranker::RankerConfig c;
  c.k_disc = k;
  c.d = 8;
  c.m = 4;
  c.q = 4;
  c.h = 8;
  return c;
}

/// Glorot weights plus non-zero random biases so every path carries signal.
inline qa::ranker::RankerParams random_params(const qa::ranker::RankerConfig& c, std::uint64_t seed) {
  auto p = qa::ranker::RankerParams::initialize(c, seed);
  qa::Rng rng(seed ^ 0xb1a5ULL);
  for (qa::ParamTensor* t : p.all()) {
    if (t->name.starts_with("b_")) {
      for (double& v : t->value.values()) v = rng.uniform(-0.5, 0.5);
    }
  }
  return p;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("qa-test-" + tag + "-" + std::to_string(std::hash<std::string>{}(tag) % 100000));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
