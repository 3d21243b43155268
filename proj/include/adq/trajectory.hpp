#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "adq/lindblad.hpp"
#include "adq/models.hpp"
#include "adq/result_table.hpp"

namespace adq {

/// One Hamiltonian with two jump sets: index 0 is used while the classical
/// parity is +1, index 1 while it is -1.
struct SwitchedModel {
  CMatrix H;
  std::array<std::vector<Jump>, 2> sets;
  Register reg;

  static SwitchedModel from_pair(const LindbladModel& plus, const LindbladModel& minus);
  static SwitchedModel single(const LindbladModel& m);
  LindbladModel branch(std::size_t set) const;
};

/// Jump sets of the chain model with the parity string replaced by the
/// classical bit: {u s-_A1 - vP s+_B1, u P s-_B1 - v s+_A1}.
SwitchedModel parity_switched_chain(const ChainParams& p);
/// Jump S^+ + P tanh(r) S^- on the Dicke space.
SwitchedModel parity_switched_squeezing(const SqueezeParams& p);

/// Classical one-bit memory. The bit P flips on every detected jump; the
/// rule maps (channel, P) to the jump set to use next.
class FeedbackController {
public:
  using Rule = std::function<std::size_t(std::size_t channel, int parity)>;

  FeedbackController(int initial_parity, Rule rule);
  /// Active set follows P.
  static FeedbackController adaptive(int initial_parity = 1);
  /// Active set frozen at the initial parity.
  static FeedbackController fixed(int initial_parity = 1);

  int parity() const { return parity_; }
  int initial_parity() const { return initial_; }
  std::size_t active_set() const { return set_; }
  void on_detected_jump(std::size_t channel);

private:
  int parity_, initial_;
  std::size_t set_;
  Rule rule_;
};

enum class PostSelection { none, even_detected_jumps };

struct UnravelingConfig {
  double dt = 0.01;
  double T = 1.0;
  double checkpoint_interval = 0.1;
  double epsilon = 0.0;  // probability that a jump is missed by the record
  PostSelection postselect = PostSelection::none;
  double max_jump_probability = 0.01;
  void validate() const;
};

struct Observable {
  std::string name;
  std::function<double(const CVector& psi, int parity)> fn;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  int initial_parity = 1;
  std::vector<double> jump_times;
  std::vector<std::size_t> channels;
  std::vector<std::uint8_t> detected;
  std::vector<int> parity_history;  // P after each jump
  std::vector<double> checkpoint_times;
  std::vector<std::string> observable_names;
  std::vector<std::vector<double>> values;  // [checkpoint][observable]
  CVector final_state;

  std::size_t detected_count() const;
  int final_parity() const { return parity_history.empty() ? initial_parity : parity_history.back(); }
};

/// Propagators shared by every trajectory of one ensemble.
class Unraveling {
public:
  Unraveling(SwitchedModel model, UnravelingConfig cfg);

  TrajectoryRecord run(FeedbackController ctrl, const CVector& psi0, const std::vector<Observable>& obs,
                       std::uint64_t seed, std::uint64_t index) const;

  const UnravelingConfig& config() const { return cfg_; }
  const SwitchedModel& model() const { return model_; }
  int levels() const { return levels_; }

private:
  SwitchedModel model_;
  UnravelingConfig cfg_;
  int levels_ = 0;                                 // dt_k = dt / 2^k, k = 0..levels
  std::array<std::vector<CMatrix>, 2> prop_;       // exp(-i H_eff dt_k)
  std::array<CMatrix, 2> decay_;                   // sum rate L^dag L
  std::int64_t ticks_per_checkpoint_ = 0;
  std::int64_t n_checkpoints_ = 0;
};

TrajectoryRecord mcwf_run(const SwitchedModel& m, FeedbackController ctrl, const CVector& psi0,
                          const UnravelingConfig& cfg, const std::vector<Observable>& obs, std::uint64_t seed,
                          std::uint64_t index = 0);

std::vector<TrajectoryRecord> mcwf_ensemble(const SwitchedModel& m, const FeedbackController& ctrl,
                                            const CVector& psi0, const UnravelingConfig& cfg,
                                            const std::vector<Observable>& obs, std::uint64_t seed,
                                            std::size_t n_traj);

std::vector<TrajectoryRecord> postselect(const std::vector<TrajectoryRecord>& records, PostSelection rule);

/// Columns: t, then mean_<obs> and std_<obs> (population) per observable.
/// Metadata carries record counts and the survival fraction under rule.
ResultTable ensemble_stats(const std::vector<TrajectoryRecord>& records, PostSelection rule = PostSelection::none);

} // namespace adq
