#include "adq/trajectory.hpp"

#include <cmath>
#include <sstream>

#include "adq/parallel.hpp"
#include "adq/rng.hpp"

namespace adq {

SwitchedModel SwitchedModel::from_pair(const LindbladModel& plus, const LindbladModel& minus) {
  plus.validate();
  minus.validate();
  if (!(plus.reg == minus.reg)) throw ConfigError("switched model: registers differ");
  if ((plus.H - minus.H).cwiseAbs().maxCoeff() > 1e-12) throw ConfigError("switched model: jump sets must share H");
  return SwitchedModel{plus.H, {plus.jumps, minus.jumps}, plus.reg};
}

SwitchedModel SwitchedModel::single(const LindbladModel& m) { return from_pair(m, m); }

LindbladModel SwitchedModel::branch(std::size_t set) const {
  return LindbladModel{"branch" + std::to_string(set), H, sets.at(set), reg};
}

SwitchedModel parity_switched_chain(const ChainParams& p) {
  const LindbladModel base = spin_chain(p);  // for the register and the signed Hamiltonian
  SwitchedModel s;
  s.reg = base.reg;
  s.H = chain_hamiltonian(base.reg, p.n, p.J, p.Delta, +1, -1);
  for (int k = 0; k < 2; ++k) {
    const double P = k == 0 ? 1.0 : -1.0;
    s.sets[k].push_back({p.u * embed(pauli::minus(), "A1", s.reg) - p.v * P * embed(pauli::plus(), "B1", s.reg), p.Gamma});
    s.sets[k].push_back({p.u * P * embed(pauli::minus(), "B1", s.reg) - p.v * embed(pauli::plus(), "A1", s.reg), p.Gamma});
  }
  return s;
}

SwitchedModel parity_switched_squeezing(const SqueezeParams& p) {
  const LindbladModel base = squeezing_standard(p);
  const DickeOperators ops = dicke_operators(p.N);
  SwitchedModel s;
  s.reg = base.reg;
  s.H = base.H;
  s.sets[0].push_back({ops.plus + std::tanh(p.r) * ops.minus, p.Gamma});
  s.sets[1].push_back({ops.plus - std::tanh(p.r) * ops.minus, p.Gamma});
  return s;
}

FeedbackController::FeedbackController(int initial_parity, Rule rule)
    : parity_(initial_parity), initial_(initial_parity), rule_(std::move(rule)) {
  if (initial_parity != 1 && initial_parity != -1) throw ConfigError("controller: parity must be +1 or -1");
  set_ = initial_parity > 0 ? 0 : 1;
}

FeedbackController FeedbackController::adaptive(int initial_parity) {
  return FeedbackController(initial_parity, [](std::size_t, int P) -> std::size_t { return P > 0 ? 0 : 1; });
}

FeedbackController FeedbackController::fixed(int initial_parity) {
  const std::size_t frozen = initial_parity > 0 ? 0 : 1;
  return FeedbackController(initial_parity, [frozen](std::size_t, int) { return frozen; });
}

void FeedbackController::on_detected_jump(std::size_t channel) {
  parity_ = -parity_;
  set_ = rule_(channel, parity_);
  if (set_ > 1) throw ConfigError("controller: rule returned an invalid jump-set index");
}

void UnravelingConfig::validate() const {
  if (!(dt > 0) || !(T >= 0) || !(checkpoint_interval > 0)) throw ConfigError("unraveling: dt, T, interval must be positive");
  if (!(epsilon >= 0 && epsilon <= 1)) throw ConfigError("unraveling: epsilon must lie in [0, 1]");
  if (!(max_jump_probability > 0 && max_jump_probability < 1)) throw ConfigError("unraveling: invalid jump-probability cap");
  const double ratio = checkpoint_interval / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1)
    throw ConfigError("unraveling: checkpoint interval must be an integer multiple of dt");
}

std::size_t TrajectoryRecord::detected_count() const {
  std::size_t c = 0;
  for (auto d : detected) c += d ? 1 : 0;
  return c;
}

Unraveling::Unraveling(SwitchedModel model, UnravelingConfig cfg) : model_(std::move(model)), cfg_(cfg) {
  cfg_.validate();
  for (std::size_t s = 0; s < 2; ++s) model_.branch(s).validate();
  double max_rate = 0;
  const auto D = static_cast<Eigen::Index>(model_.reg.dim());
  for (std::size_t s = 0; s < 2; ++s) {
    decay_[s] = CMatrix::Zero(D, D);
    for (const auto& j : model_.sets[s]) decay_[s] += j.rate * (j.op.adjoint() * j.op);
    decay_[s] = 0.5 * (decay_[s] + decay_[s].adjoint());
    const auto ev = eig(decay_[s], true).values;
    max_rate = std::max(max_rate, ev.size() ? ev[0].real() : 0.0);
  }
  // finest level keeps rate*dt_k <= cap/2 for every state
  const double need = max_rate * cfg_.dt / (0.5 * cfg_.max_jump_probability);
  levels_ = need > 1 ? static_cast<int>(std::ceil(std::log2(need))) : 0;
  if (levels_ > 24) throw ConfigError("unraveling: dt too large for the jump rates; reduce dt");
  for (std::size_t s = 0; s < 2; ++s) {
    const CMatrix heff = model_.H - 0.5 * I_unit * decay_[s];
    for (int k = 0; k <= levels_; ++k) prop_[s].push_back(expm(-I_unit * heff * std::ldexp(cfg_.dt, -k)));
  }
  ticks_per_checkpoint_ = static_cast<std::int64_t>(std::llround(cfg_.checkpoint_interval / cfg_.dt)) << levels_;
  n_checkpoints_ = static_cast<std::int64_t>(std::floor(cfg_.T / cfg_.checkpoint_interval + 1e-9)) + 1;
}

TrajectoryRecord Unraveling::run(FeedbackController ctrl, const CVector& psi0, const std::vector<Observable>& obs,
                                 std::uint64_t seed, std::uint64_t index) const {
  if (static_cast<std::size_t>(psi0.size()) != model_.reg.dim()) throw ConfigError("mcwf: state dimension mismatch");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ConfigError("mcwf: initial state not normalized");
  auto g = make_stream(seed, index);
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.index = index;
  rec.initial_parity = ctrl.parity();
  for (const auto& o : obs) rec.observable_names.push_back(o.name);

  CVector psi = psi0;
  const double tick = std::ldexp(cfg_.dt, -levels_);
  auto checkpoint = [&](std::int64_t k) {
    rec.checkpoint_times.push_back(static_cast<double>(k) * cfg_.checkpoint_interval);
    std::vector<double> row;
    for (const auto& o : obs) row.push_back(o.fn(psi, ctrl.parity()));
    rec.values.push_back(std::move(row));
  };
  checkpoint(0);

  std::int64_t t = 0;
  const double half_cap = 0.5 * cfg_.max_jump_probability;
  for (std::int64_t c = 1; c < n_checkpoints_; ++c) {
    const std::int64_t stop = c * ticks_per_checkpoint_;
    while (t < stop) {
      const std::size_t s = ctrl.active_set();
      const double rate = std::real(psi.dot(decay_[s] * psi));
      int k = 0;
      while (k < levels_ && rate * std::ldexp(cfg_.dt, -k) > half_cap) ++k;
      auto span = [&](int lvl) { return std::int64_t{1} << (levels_ - lvl); };
      while (k < levels_ && (t % span(k) != 0 || t + span(k) > stop)) ++k;

      const CVector next = prop_[s][static_cast<std::size_t>(k)] * psi;
      const double keep = next.squaredNorm();
      const double pjump = 1.0 - keep;
      if (pjump > cfg_.max_jump_probability) {
        std::ostringstream os;
        os << "mcwf: per-step jump probability " << pjump << " exceeds cap " << cfg_.max_jump_probability;
        throw NumericError(os.str());
      }
      t += span(k);

      bool jumped = false;
      if (uniform01(g) < pjump) {
        std::vector<double> w;
        double total = 0;
        for (const auto& j : model_.sets[s]) {
          w.push_back(j.rate * (j.op * psi).squaredNorm());
          total += w.back();
        }
        if (total > 0) {
          double x = uniform01(g) * total;
          std::size_t mu = 0;
          while (mu + 1 < w.size() && x >= w[mu]) x -= w[mu++];
          psi = (model_.sets[s][mu].op * psi).eval();
          psi /= psi.norm();
          const bool det = uniform01(g) >= cfg_.epsilon;
          if (det) ctrl.on_detected_jump(mu);
          rec.jump_times.push_back(static_cast<double>(t) * tick);
          rec.channels.push_back(mu);
          rec.detected.push_back(det ? 1 : 0);
          rec.parity_history.push_back(ctrl.parity());
          jumped = true;
        }
      }
      if (!jumped) {
        if (!(keep > 1e-300)) throw NumericError("mcwf: norm underflow");
        psi = next / std::sqrt(keep);
      }
    }
    checkpoint(c);
  }
  rec.final_state = psi;
  return rec;
}

TrajectoryRecord mcwf_run(const SwitchedModel& m, FeedbackController ctrl, const CVector& psi0,
                          const UnravelingConfig& cfg, const std::vector<Observable>& obs, std::uint64_t seed,
                          std::uint64_t index) {
  return Unraveling(m, cfg).run(std::move(ctrl), psi0, obs, seed, index);
}

std::vector<TrajectoryRecord> mcwf_ensemble(const SwitchedModel& m, const FeedbackController& ctrl,
                                            const CVector& psi0, const UnravelingConfig& cfg,
                                            const std::vector<Observable>& obs, std::uint64_t seed,
                                            std::size_t n_traj) {
  const Unraveling u(m, cfg);
  std::vector<TrajectoryRecord> out(n_traj);
  parallel_for(n_traj, [&](std::size_t i) { out[i] = u.run(ctrl, psi0, obs, seed, i); });
  return out;
}

std::vector<TrajectoryRecord> postselect(const std::vector<TrajectoryRecord>& records, PostSelection rule) {
  if (rule == PostSelection::none) return records;
  std::vector<TrajectoryRecord> out;
  for (const auto& r : records)
    if (r.detected_count() % 2 == 0) out.push_back(r);
  return out;
}

ResultTable ensemble_stats(const std::vector<TrajectoryRecord>& records, PostSelection rule) {
  const auto kept = postselect(records, rule);
  ResultTable t;
  t.columns.push_back({"t", "1/Gamma", ColumnType::real});
  const TrajectoryRecord* ref = records.empty() ? nullptr : &records.front();
  if (ref)
    for (const auto& n : ref->observable_names) {
      t.columns.push_back({"mean_" + n, "1", ColumnType::real});
      t.columns.push_back({"std_" + n, "1", ColumnType::real});
    }
  for (const auto& r : records)
    if (r.checkpoint_times != ref->checkpoint_times || r.observable_names != ref->observable_names)
      throw ConfigError("ensemble_stats: records do not share a checkpoint schedule");

  t.metadata["n_records"] = records.size();
  t.metadata["n_survivors"] = kept.size();
  t.metadata["survival_fraction"] =
      records.empty() ? 0.0 : static_cast<double>(kept.size()) / static_cast<double>(records.size());
  t.metadata["postselect"] = rule == PostSelection::none ? "none" : "even_detected_jumps";
  if (!ref || kept.empty()) return t;

  const double n = static_cast<double>(kept.size());
  for (std::size_t c = 0; c < ref->checkpoint_times.size(); ++c) {
    std::vector<Cell> row{ref->checkpoint_times[c]};
    for (std::size_t o = 0; o < ref->observable_names.size(); ++o) {
      double mean = 0;
      for (const auto& r : kept) mean += r.values[c][o];
      mean /= n;
      double var = 0;
      for (const auto& r : kept) var += (r.values[c][o] - mean) * (r.values[c][o] - mean);
      row.emplace_back(mean);
      row.emplace_back(std::sqrt(var / n));
    }
    t.add_row(std::move(row));
  }
  return t;
}

} // namespace adq
