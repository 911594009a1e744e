#include "endorse/simulator/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <memory>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

#include "endorse/common/error.hpp"
#include "endorse/common/rng.hpp"
#include "endorse/crypto/rogue_key.hpp"
#include "endorse/protocol/collection.hpp"
#include "endorse/protocol/ledger.hpp"
#include "endorse/protocol/request.hpp"
#include "endorse/selection/probability.hpp"

namespace endorse::simulator {

namespace {

// Stream identifiers for derive_seed.
enum Stream : std::uint64_t {
  kAdversaryStream = 1,
  kPartitionStream,
  kAssignStream,
  kKeyStream,
  kOverlayStream,
  kLinkStream,
  kInvalidSigStream,
  kRogueStream,
};

std::vector<AdversaryKind> apportion(std::size_t count, const AdversaryMix& mix) {
  const AdversaryKind kinds[] = {AdversaryKind::Silent, AdversaryKind::InvalidSig, AdversaryKind::SybilDuplicate,
                                 AdversaryKind::RogueKey};
  const double weights[] = {mix.silent, mix.invalid_sig, mix.sybil_duplicate, mix.rogue_key};
  const double total = std::accumulate(std::begin(weights), std::end(weights), 0.0);
  std::size_t counts[4];
  double remainder[4];
  std::size_t assigned = 0;
  for (int k = 0; k < 4; ++k) {
    double exact = weights[k] / total * static_cast<double>(count);
    counts[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  while (assigned < count) {
    int best = 0;
    for (int k = 1; k < 4; ++k)
      if (remainder[k] > remainder[best]) best = k;
    ++counts[best];
    remainder[best] = -1;
    ++assigned;
  }
  std::vector<AdversaryKind> out;
  for (int k = 0; k < 4; ++k) out.insert(out.end(), counts[k], kinds[k]);
  return out;
}

std::string format_time(SimTime t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9f", to_seconds(t));
  return buf;
}

std::vector<std::optional<AdversaryKind>> place_adversaries(const SimConfig& sim) {
  const std::size_t n_nodes = sim.node_count;
  std::vector<std::optional<AdversaryKind>> kinds(n_nodes);
  if (!sim.adversaries.empty()) {
    for (const auto& a : sim.adversaries) kinds[a.node] = a.kind;
    return kinds;
  }
  auto count = static_cast<std::size_t>(std::llround(sim.adversary_fraction * static_cast<double>(n_nodes)));
  if (count == 0) return kinds;
  Rng rng(derive_seed(sim.seed, kAdversaryStream));
  std::vector<std::uint32_t> order(n_nodes);
  std::iota(order.begin(), order.end(), 0u);
  for (std::size_t i = 0; i < count; ++i) std::swap(order[i], order[i + rng.below(n_nodes - i)]);
  auto mix = apportion(count, sim.adversary_mix);
  for (std::size_t i = 0; i < count; ++i) kinds[order[i]] = mix[i];
  return kinds;
}

std::vector<std::uint32_t> hosts_of(const selection::EndorsementGroup& g) {
  std::vector<std::uint32_t> out;
  out.reserve(g.endorsers.size());
  for (auto e : g.endorsers) out.push_back(selection::to_index(e));
  return out;
}

/// Sybil owners among `candidates` get sybil_identities - 1 extra identities,
/// numbered after all nodes and assigned like mid-epoch joiners.
void add_sybil_extras(BootstrapPlan& plan, const SimConfig& sim, std::span<const std::uint32_t> candidates,
                      std::uint64_t assign_seed) {
  std::uint32_t next = static_cast<std::uint32_t>(sim.node_count);
  for (auto node : candidates) {
    if (plan.node_kind[node] != AdversaryKind::SybilDuplicate) continue;
    for (std::size_t k = 1; k < sim.sybil_identities; ++k, ++next)
      plan.identities.push_back(
          {node, node, true, hosts_of(selection::mid_epoch_assign(selection::NodeId{next}, plan.groups, assign_seed))});
  }
}

}  // namespace

BootstrapPlan plan_bootstrap(const SimConfig& sim) {
  sim.validate();
  BootstrapPlan plan;
  plan.node_kind = place_adversaries(sim);
  std::vector<selection::NodeId> ids(sim.node_count);
  std::vector<std::uint32_t> candidates(sim.node_count);
  for (std::uint32_t i = 0; i < sim.node_count; ++i) {
    ids[i] = selection::NodeId{i};
    candidates[i] = i;
  }
  plan.groups = selection::partition_candidates(ids, sim.endorsement_nodes + 1, derive_seed(sim.seed, kPartitionStream));
  const std::uint64_t assign_seed = derive_seed(sim.seed, kAssignStream);
  selection::GroupIndex index(plan.groups);
  for (auto i : candidates) plan.identities.push_back({i, i, false, hosts_of(index.assign(selection::NodeId{i}, assign_seed))});
  add_sybil_extras(plan, sim, candidates, assign_seed);
  return plan;
}

BootstrapPlan plan_reconfiguration(const SimConfig& sim, std::size_t joins) {
  sim.validate();
  if (joins > sim.node_count) throw Error(ErrorCode::ConfigInvalid, "joins must not exceed node_count");
  if (joins == sim.node_count) return plan_bootstrap(sim);
  const std::size_t members = sim.node_count - joins;
  if (members < sim.endorsement_nodes + 1)
    throw Error(ErrorCode::ConfigInvalid, "existing members must fill endorsement_nodes + 1 groups");
  BootstrapPlan plan;
  plan.node_kind = place_adversaries(sim);
  std::vector<selection::NodeId> ids(members);
  for (std::uint32_t i = 0; i < members; ++i) ids[i] = selection::NodeId{i};
  plan.groups = selection::partition_candidates(ids, sim.endorsement_nodes + 1, derive_seed(sim.seed, kPartitionStream));
  const std::uint64_t assign_seed = derive_seed(sim.seed, kAssignStream);
  std::vector<std::uint32_t> joiners;
  for (auto i = static_cast<std::uint32_t>(members); i < sim.node_count; ++i) {
    joiners.push_back(i);
    plan.identities.push_back(
        {i, i, false, hosts_of(selection::mid_epoch_assign(selection::NodeId{i}, plan.groups, assign_seed))});
  }
  add_sybil_extras(plan, sim, joiners, assign_seed);
  return plan;
}

namespace {

using crypto::OpCounts;

enum class Verdict { Accepted, VerificationFailed, DepositReused, DuplicateActive, NoDeposit };

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Accepted: return "accepted";
    case Verdict::VerificationFailed: return "verification_failed";
    case Verdict::DepositReused: return "deposit_reused";
    case Verdict::DuplicateActive: return "duplicate_active";
    case Verdict::NoDeposit: return "no_deposit";
  }
  return "unknown";
}

Verdict verdict_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::DepositReused: return Verdict::DepositReused;
    case ErrorCode::DuplicateActive: return Verdict::DuplicateActive;
    case ErrorCode::NoDeposit: return Verdict::NoDeposit;
    default: return Verdict::VerificationFailed;
  }
}

struct Submission {
  Verdict verdict;
  OpCounts verify_ops;  // cost of checking the announced record
};

/// Crypto and ledger side of the simulation. Each call reports the operations
/// it performed; the engine turns them into CPU time.
class Backend {
 public:
  virtual ~Backend() = default;
  /// Endorser-side policy decision.
  virtual bool approve(std::uint32_t endorser, std::uint32_t identity) = 0;
  /// Produce the endorser's response; returns the ops spent.
  virtual OpCounts sign(std::uint32_t endorser, std::uint32_t identity, std::size_t index, bool honest) = 0;
  /// Verify and collect a response; false if discarded.
  virtual bool collect(std::uint32_t identity, std::size_t index, OpCounts& ops) = 0;
  virtual std::size_t popcount(std::uint32_t identity) const = 0;
  /// Positions whose signature has been collected.
  virtual std::vector<std::size_t> signer_indices(std::uint32_t identity) const = 0;
  /// Aggregate and append to the ledger.
  virtual Submission finalize(std::uint32_t identity) = 0;
  /// Rogue-key record announced by an adversarial identity.
  virtual Submission forge(std::uint32_t identity) = 0;
  virtual std::size_t ledger_active() const = 0;
  virtual std::vector<std::string> export_ledger() const { return {}; }
};

class ModeledBackend final : public Backend {
 public:
  ModeledBackend(const BootstrapPlan& plan, std::size_t n) : plan_(plan), n_(n) {
    collected_.assign(plan.identities.size(), {});
    pending_.assign(plan.identities.size(), std::vector<std::uint8_t>(n, 0));
  }

  bool approve(std::uint32_t, std::uint32_t identity) override {
    return !book_.is_active(token(plan_.identities[identity].deposit));
  }

  OpCounts sign(std::uint32_t, std::uint32_t identity, std::size_t index, bool honest) override {
    pending_[identity][index] = honest ? 1 : 2;
    return honest ? op_model::kSign : op_model::kInvalidSign;
  }

  bool collect(std::uint32_t identity, std::size_t index, OpCounts& ops) override {
    ops = op_model::kVerifySignature;
    if (pending_[identity][index] != 1) return false;
    ++collected_[identity];
    pending_[identity][index] = 3;
    return true;
  }

  std::size_t popcount(std::uint32_t identity) const override { return collected_[identity]; }

  std::vector<std::size_t> signer_indices(std::uint32_t identity) const override {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n_; ++i)
      if (pending_[identity][i] == 3) out.push_back(i);
    return out;
  }

  Submission finalize(std::uint32_t identity) override {
    OpCounts ops = op_model::verify_aggregate(collected_[identity]);
    const Identity& id = plan_.identities[identity];
    Bytes who = identity_bytes(identity);
    try {
      book_.activate(who, token(id.deposit), identity);
    } catch (const Error& e) {
      return {verdict_of(e.code()), ops};
    }
    return {Verdict::Accepted, ops};
  }

  Submission forge(std::uint32_t) override { return {Verdict::VerificationFailed, op_model::verify_aggregate(n_ + 1)}; }

  std::size_t ledger_active() const override { return book_.active_count(); }

 private:
  static protocol::TokenAddress token(std::uint32_t deposit) { return "deposit-" + std::to_string(deposit); }
  static Bytes identity_bytes(std::uint32_t identity) {
    ByteWriter w;
    w.u32(identity);
    return std::move(w).take();
  }

  const BootstrapPlan& plan_;
  std::size_t n_;
  protocol::DepositBook book_;
  std::vector<std::size_t> collected_;
  std::vector<std::vector<std::uint8_t>> pending_;  // 0 none, 1 valid, 2 invalid, 3 collected
};

class FullBackend final : public Backend {
 public:
  FullBackend(const BootstrapPlan& plan, const SimConfig& sim)
      : plan_(plan),
        n_(sim.endorsement_nodes),
        invalid_rng_(derive_seed(sim.seed, kInvalidSigStream)),
        rogue_rng_(derive_seed(sim.seed, kRogueStream)),
        ledger_(&registry_, [this](const crypto::G2Point& pk, const crypto::PublicKeySet& set) {
          auto it = by_key_.find(key_string(pk));
          return it != by_key_.end() && sets_[it->second].digest() == set.digest();
        }) {
    const OpCounts before = crypto::op_counts();
    Rng rng(derive_seed(sim.seed, kKeyStream));
    const auto ids = plan.identities.size();
    std::size_t extras = 0;
    for (const auto& id : plan.identities) extras += id.extra;
    keys_.reserve(sim.node_count + extras);
    for (std::size_t node = 0; node < sim.node_count; ++node) keys_.push_back(crypto::KeyPair::generate(rng));
    for (const auto& id : plan.identities) {
      if (id.extra) keys_.push_back(crypto::KeyPair::generate(rng));
      identity_key_.push_back(id.extra ? &keys_.back() : &keys_[id.host]);
    }
    for (std::size_t i = 0; i < ids; ++i) by_key_.emplace(key_string(identity_key_[i]->public_key()), i);
    for (std::uint32_t node = 0; node < sim.node_count; ++node)
      registry_.add(token(node), policy_.min_deposit, keys_[node].public_key());
    endorser_state_.resize(sim.node_count);
    for (std::uint32_t node = 0; node < sim.node_count; ++node) endorser_state_[node].key = &keys_[node];

    protocol::RequestLog log;
    for (std::size_t i = 0; i < ids; ++i) {
      const Identity& id = plan.identities[i];
      std::vector<crypto::G2Point> pks;
      for (auto e : id.endorsers) pks.push_back(keys_[e].public_key());
      sets_.emplace_back(std::move(pks));
      protocol::CandidateState cand{identity_key_[i], token(id.deposit), {1.0, 25.0, 1.0}};
      requests_.push_back(protocol::build_request(cand, 1, registry_, policy_, log));
      collections_.emplace_back(sets_.back(),
                                protocol::endorsement_message(identity_key_[i]->public_key(), token(id.deposit)));
    }
    pending_.assign(ids, std::vector<std::optional<crypto::Signature>>(n_));
    crypto::op_counts() = before;  // setup is not charged
  }

  bool approve(std::uint32_t endorser, std::uint32_t identity) override {
    return protocol::evaluate_request(endorser_state_[endorser], requests_[identity], registry_, policy_).approved();
  }

  OpCounts sign(std::uint32_t endorser, std::uint32_t identity, std::size_t index, bool honest) override {
    const OpCounts before = crypto::op_counts();
    if (honest) {
      pending_[identity][index] = protocol::endorse(keys_[endorser], requests_[identity], sets_[identity]);
    } else {
      pending_[identity][index] = crypto::Signature{crypto::G1Point::random(invalid_rng_), index};
    }
    return crypto::op_counts() - before;
  }

  bool collect(std::uint32_t identity, std::size_t index, OpCounts& ops) override {
    const OpCounts before = crypto::op_counts();
    bool ok = true;
    try {
      collections_[identity].collect(*pending_[identity][index], index);
    } catch (const Error&) {
      ok = false;
    }
    ops = crypto::op_counts() - before;
    return ok;
  }

  std::size_t popcount(std::uint32_t identity) const override { return collections_[identity].popcount(); }

  std::vector<std::size_t> signer_indices(std::uint32_t identity) const override {
    return collections_[identity].vector().indices();
  }

  Submission finalize(std::uint32_t identity) override {
    const OpCounts before = crypto::op_counts();
    auto agg = collections_[identity].try_finalize();
    const Identity& id = plan_.identities[identity];
    Verdict verdict = Verdict::Accepted;
    try {
      ledger_.append({identity_key_[identity]->public_key(), *agg, sets_[identity], token(id.deposit), 1,
                      protocol::RecordStatus::Active, std::nullopt});
    } catch (const Error& e) {
      verdict = verdict_of(e.code());
    }
    return {verdict, crypto::op_counts() - before};
  }

  Submission forge(std::uint32_t identity) override {
    const OpCounts outer = crypto::op_counts();
    const auto& victims = sets_[identity];
    auto vector = crypto::EndorserVector::for_set(victims);
    crypto::G2Point sum;
    for (std::size_t j = 0; j < victims.size(); ++j) {
      vector.set(j);
      sum += victims[j];
    }
    const auto alpha = crypto::Scalar::random(rogue_rng_);
    const auto rogue_pk = crypto::G2Point::generator() * alpha + -sum;
    const auto& tok = token(plan_.identities[identity].deposit);
    auto forgery = crypto::rogue_key_attempt(alpha, victims, vector, protocol::endorsement_message(rogue_pk, tok));
    crypto::op_counts() = outer;  // the adversary's offline work is not charged

    Verdict verdict = Verdict::Accepted;
    try {
      ledger_.append({forgery.rogue_key, forgery.as_aggregate(), forgery.forged_set, tok, 1,
                      protocol::RecordStatus::Active, std::nullopt});
    } catch (const Error& e) {
      verdict = verdict_of(e.code());
    }
    return {verdict, crypto::op_counts() - outer};
  }

  std::size_t ledger_active() const override { return ledger_.active_count(); }

  std::vector<std::string> export_ledger() const override {
    std::ostringstream out;
    ledger_.export_lines(out);
    std::vector<std::string> lines;
    std::istringstream in(out.str());
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return lines;
  }

 private:
  static protocol::TokenAddress token(std::uint32_t deposit) { return "deposit-" + std::to_string(deposit); }
  static std::string key_string(const crypto::G2Point& pk) {
    auto c = pk.compress();
    return {c.begin(), c.end()};
  }

  const BootstrapPlan& plan_;
  std::size_t n_;
  Rng invalid_rng_;
  Rng rogue_rng_;
  protocol::Policy policy_;
  protocol::TokenRegistry registry_;
  protocol::GlobalLedger ledger_;
  std::vector<crypto::KeyPair> keys_;  // nodes, then Sybil extras
  std::vector<const crypto::KeyPair*> identity_key_;
  std::unordered_map<std::string, std::size_t> by_key_;
  std::vector<crypto::PublicKeySet> sets_;
  std::vector<protocol::EndorsementRequest> requests_;
  std::vector<protocol::CollectionState> collections_;
  std::vector<protocol::EndorserState> endorser_state_;
  std::vector<std::vector<std::optional<crypto::Signature>>> pending_;
};

enum class EventType : std::uint8_t { RequestArrive, ResponseArrive, AnnounceArrive, CpuDone, Timeout };

struct Event {
  SimTime time;
  std::uint64_t seq;
  EventType type;
  std::uint32_t a, b, c;  // meaning depends on type
  SimTime sent;

  bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

enum class TaskKind : std::uint8_t { Sign, VerifyResponse, VerifyAnnouncement };

struct Task {
  TaskKind kind;
  std::uint32_t identity;  // or announcement id
  std::uint32_t index;
  bool flag;  // response validity from the network's view (approved, honest)
};

struct NodeState {
  std::deque<Task> high, low;
  bool busy = false;
  Task running{};
  std::uint64_t sent = 0;
};

struct CandidateState {
  bool finalized = false;
  bool failed = false;
  std::uint64_t requests = 0;
  std::uint64_t responses = 0;
  std::uint64_t pushes = 0;
  std::int64_t announcement = -1;
  std::vector<SimTime> request_sent;
};

struct Announcement {
  std::uint32_t origin_identity;
  std::uint32_t host;
  bool valid;
  bool forged;
  OpCounts verify_ops;
  std::size_t bytes;
  std::size_t honest_verified = 0;
  SimTime completed = -1;
};

class Engine {
 public:
  Engine(const SimConfig& sim, const NetworkConfig& net, const BootstrapOptions& options, const BootstrapPlan& plan)
      : sim_(sim),
        net_(net),
        options_(options),
        plan_(plan),
        overlay_(sim.node_count, net.gossip_fanout, derive_seed(sim.seed, kOverlayStream)),
        links_(net, derive_seed(sim.seed, kLinkStream)),
        nodes_(sim.node_count),
        candidates_(plan_.identities.size()),
        signers_(plan_.identities.size()) {
    net.validate();
    if (sim.crypto == CryptoMode::Full) {
      backend_ = std::make_unique<FullBackend>(plan_, sim);
    } else {
      backend_ = std::make_unique<ModeledBackend>(plan_, sim.endorsement_nodes);
    }
    for (std::uint32_t i = 0; i < sim.node_count; ++i) honest_nodes_ += plan_.honest(i);
    threshold_ = selection::quorum_threshold(sim.endorsement_nodes);
    bitvector_bytes_ = 4 + (sim.endorsement_nodes + 7) / 8;
  }

  BootstrapResult run() {
    start();
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      dispatch(ev);
    }
    return finish();
  }

 private:
  // ---- scheduling -------------------------------------------------------------

  void push(SimTime t, EventType type, std::uint32_t a, std::uint32_t b = 0, std::uint32_t c = 0, SimTime sent = 0) {
    queue_.push({t, seq_++, type, a, b, c, sent});
  }

  SimTime send(std::uint32_t from, std::uint32_t to, std::size_t bytes) {
    ++nodes_[from].sent;
    ++messages_;
    SimTime arrival = links_.send(from, to, bytes, now_);
    if (plan_.honest(from) && plan_.honest(to)) max_hop_ = std::max(max_hop_, arrival - now_);
    return arrival;
  }

  void event(const char* type, std::uint32_t node) {
    if (!options_.record_events) return;
    events_.push_back(format_time(now_) + "," + type + "," + std::to_string(node));
  }

  void enqueue(std::uint32_t node, Task task, bool high) {
    auto& n = nodes_[node];
    (high ? n.high : n.low).push_back(task);
    if (!n.busy) start_next(node);
  }

  void start_next(std::uint32_t node) {
    auto& n = nodes_[node];
    if (n.high.empty() && n.low.empty()) {
      n.busy = false;
      return;
    }
    auto& q = n.high.empty() ? n.low : n.high;
    n.running = q.front();
    q.pop_front();
    n.busy = true;
    OpCounts ops = execute(node, n.running);
    const std::uint64_t units = sim_.work.units(ops);
    charge(ops, units);
    auto duration = static_cast<SimTime>(std::llround(static_cast<double>(units) * sim_.work_unit_us * 1e3));
    push(now_ + duration, EventType::CpuDone, node);
  }

  void charge(const OpCounts& ops, std::uint64_t units) {
    totals_.ops.hashes += ops.hashes;
    totals_.ops.exponentiations += ops.exponentiations;
    totals_.ops.pairings += ops.pairings;
    totals_.work_units += units;
  }

  // Crypto happens when the CPU picks the task up; effects apply on completion.
  OpCounts execute(std::uint32_t node, Task& task) {
    switch (task.kind) {
      case TaskKind::Sign:
        ++totals_.signs;
        return backend_->sign(node, task.identity, task.index, task.flag);
      case TaskKind::VerifyResponse: {
        ++totals_.signature_verifications;
        OpCounts ops;
        task.flag = backend_->collect(task.identity, task.index, ops);
        return ops;
      }
      case TaskKind::VerifyAnnouncement:
        ++totals_.announcement_verifications;
        return announcements_[task.identity].verify_ops;
    }
    return {};
  }

  // ---- protocol --------------------------------------------------------------

  void start() {
    const SimTime deadline = 2 * from_ms(net_.delta_ms) + from_ms(net_.protocol_timeout_ms);
    for (std::uint32_t id = 0; id < plan_.identities.size(); ++id) {
      const Identity& ident = plan_.identities[id];
      auto& cand = candidates_[id];
      cand.request_sent.assign(ident.endorsers.size(), 0);
      for (std::uint32_t i = 0; i < ident.endorsers.size(); ++i) {
        SimTime at = send(ident.host, ident.endorsers[i], sim_.message_sizes.request);
        cand.request_sent[i] = now_;
        ++cand.requests;
        push(at, EventType::RequestArrive, ident.endorsers[i], id, i);
      }
      event("request_sent", id);
      push(deadline, EventType::Timeout, id);
      if (!ident.extra && plan_.node_kind[ident.host] == AdversaryKind::RogueKey) forge(id);
    }
  }

  void forge(std::uint32_t identity) {
    ++forgery_attempts_;
    Submission s = backend_->forge(identity);
    if (s.verdict == Verdict::Accepted) ++forgeries_accepted_;
    const std::uint32_t host = plan_.identities[identity].host;
    auto ann = make_announcement(identity, host, s, true);
    event("forgery_announced", identity);
    ++direct_total_;
    for (auto peer : overlay_.peers(host)) push(send(host, peer, announcements_[ann].bytes), EventType::AnnounceArrive, peer, ann, host);
  }

  std::uint32_t make_announcement(std::uint32_t identity, std::uint32_t host, const Submission& s, bool forged) {
    auto id = static_cast<std::uint32_t>(announcements_.size());
    announcements_.push_back({identity, host, s.verdict == Verdict::Accepted, forged, s.verify_ops,
                              sim_.message_sizes.announcement + bitvector_bytes_ + (forged ? 1u : 0u)});
    received_.resize(received_.size() + sim_.node_count, false);
    return id;
  }

  void dispatch(const Event& ev) {
    switch (ev.type) {
      case EventType::RequestArrive: on_request(ev.a, ev.b, ev.c); break;
      case EventType::ResponseArrive: on_response(ev.a, ev.b, ev.c != 0); break;
      case EventType::AnnounceArrive: on_announcement(ev.a, ev.b); break;
      case EventType::CpuDone: on_cpu_done(ev.a); break;
      case EventType::Timeout: on_timeout(ev.a); break;
    }
  }

  void on_request(std::uint32_t endorser, std::uint32_t identity, std::uint32_t index) {
    if (plan_.node_kind[endorser] == AdversaryKind::Silent) return;
    const bool approved = backend_->approve(endorser, identity);
    if (!approved) {
      // Rejection travels back as a response without a signature.
      push(send(endorser, plan_.identities[identity].host, sim_.message_sizes.response), EventType::ResponseArrive,
           identity, index, 0);
      return;
    }
    const bool honest = plan_.node_kind[endorser] != AdversaryKind::InvalidSig;
    enqueue(endorser, {TaskKind::Sign, identity, index, honest}, true);
  }

  void on_response(std::uint32_t identity, std::uint32_t index, bool carries_signature) {
    auto& cand = candidates_[identity];
    ++cand.responses;
    max_round_trip_ = std::max(max_round_trip_, now_ - cand.request_sent[index]);
    event("response_received", identity);
    if (!carries_signature || cand.finalized || cand.failed) return;
    enqueue(plan_.identities[identity].host, {TaskKind::VerifyResponse, identity, index, false}, true);
  }

  void on_cpu_done(std::uint32_t node) {
    Task task = nodes_[node].running;
    switch (task.kind) {
      case TaskKind::Sign:
        push(send(node, plan_.identities[task.identity].host, sim_.message_sizes.response),
             EventType::ResponseArrive, task.identity, task.index, 1);
        break;
      case TaskKind::VerifyResponse:
        if (!task.flag) {
          ++invalid_discarded_;
          event("signature_rejected", task.identity);
        } else {
          maybe_finalize(task.identity);
        }
        break;
      case TaskKind::VerifyAnnouncement: verified(node, task.identity); break;
    }
    start_next(node);
  }

  void maybe_finalize(std::uint32_t identity) {
    auto& cand = candidates_[identity];
    if (cand.finalized || cand.failed || backend_->popcount(identity) < threshold_) return;
    cand.finalized = true;
    const Identity& ident = plan_.identities[identity];
    for (auto i : backend_->signer_indices(identity)) signers_[identity].push_back(ident.endorsers[i]);
    Submission s = backend_->finalize(identity);
    const std::uint32_t host = ident.host;
    auto ann = make_announcement(identity, host, s, false);
    cand.announcement = ann;
    event("finalized", identity);
    if (s.verdict != Verdict::Accepted) {
      ++failure_reasons_[verdict_name(s.verdict)];
      event("ledger_rejected", identity);
    }
    ++direct_total_;
    // The host holds its own record; it counts as verified there.
    received_[static_cast<std::size_t>(ann) * sim_.node_count + host] = true;
    if (announcements_[ann].valid && plan_.honest(host)) note_verified(ann);
    for (auto peer : overlay_.peers(host)) {
      ++cand.pushes;
      push(send(host, peer, announcements_[ann].bytes), EventType::AnnounceArrive, peer, ann, host);
    }
  }

  void on_announcement(std::uint32_t node, std::uint32_t ann) {
    const std::size_t slot = static_cast<std::size_t>(ann) * sim_.node_count + node;
    if (received_[slot]) {
      ++duplicates_;
      return;
    }
    received_[slot] = true;
    if (plan_.node_kind[node] == AdversaryKind::Silent) return;
    enqueue(node, {TaskKind::VerifyAnnouncement, ann, 0, false}, false);
  }

  void verified(std::uint32_t node, std::uint32_t ann) {
    Announcement& a = announcements_[ann];
    if (!a.valid) return;
    if (plan_.honest(node)) note_verified(ann);
    for (auto peer : overlay_.peers(node)) {
      if (received_[static_cast<std::size_t>(ann) * sim_.node_count + peer]) continue;
      push(send(node, peer, a.bytes), EventType::AnnounceArrive, peer, ann, node);
    }
  }

  void note_verified(std::uint32_t ann) {
    Announcement& a = announcements_[ann];
    if (++a.honest_verified == honest_nodes_) {
      a.completed = now_;
      event("dissemination_complete", a.origin_identity);
    }
  }

  void on_timeout(std::uint32_t identity) {
    auto& cand = candidates_[identity];
    if (cand.finalized) return;
    cand.failed = true;
    ++failure_reasons_["quorum_timeout"];
    event("timeout", identity);
  }

  // ---- report -----------------------------------------------------------------

  BootstrapResult finish() {
    BootstrapResult out;
    BootstrapReport& r = out.report;
    const std::size_t n = sim_.endorsement_nodes;
    r.nodes = sim_.node_count;
    r.identities = plan_.identities.size();
    r.endorsement_nodes = n;
    r.stress_run = sim_.stress_run();

    std::vector<double> done;
    SimTime completion = 0;
    for (std::uint32_t id = 0; id < plan_.identities.size(); ++id) {
      const auto& cand = candidates_[id];
      const Identity& ident = plan_.identities[id];
      const bool accepted = cand.announcement >= 0 && announcements_[cand.announcement].valid;
      if (accepted) {
        ++r.finalized;
      } else {
        ++r.failed_candidates;
      }
      const std::uint64_t direct = cand.requests + cand.responses + cand.pushes;
      r.max_direct_per_candidate = std::max(r.max_direct_per_candidate, direct);
      r.direct_total += cand.requests;

      if (ident.extra || !plan_.honest(ident.host)) continue;
      double t = -1;
      if (accepted) {
        const auto& a = announcements_[cand.announcement];
        if (a.completed >= 0) {
          t = to_seconds(a.completed);
          completion = std::max(completion, a.completed);
          done.push_back(t);
        } else {
          r.honest_unreached += honest_nodes_ - a.honest_verified;
        }
      }
      r.per_node_times_s.push_back(t);
      std::size_t responders = 0;
      for (auto e : ident.endorsers) responders += plan_.responds(e);
      if (responders >= threshold_ && !accepted) ++r.conformant_stalled;
    }
    r.direct_total += direct_total_;
    r.direct_expected = r.identities * (n + 1);
    r.completion_time_s = to_seconds(completion);
    if (!done.empty()) {
      std::sort(done.begin(), done.end());
      auto at = [&](double q) { return done[static_cast<std::size_t>(q * static_cast<double>(done.size() - 1))]; };
      r.per_node_summary = {done.front(), at(0.5), at(0.9), done.back(),
                            std::accumulate(done.begin(), done.end(), 0.0) / static_cast<double>(done.size())};
    }
    r.failure_reasons = failure_reasons_;
    if (r.failed_candidates > 0) {
      std::size_t explained = 0;
      for (auto& [k, v] : r.failure_reasons) explained += v;
      if (explained < r.failed_candidates) r.failure_reasons["not_finalized"] = r.failed_candidates - explained;
    }

    r.messages_total = messages_;
    for (const auto& node : nodes_) r.messages_per_node_max = std::max(r.messages_per_node_max, node.sent);
    r.messages_per_node_mean = static_cast<double>(messages_) / static_cast<double>(sim_.node_count);
    r.duplicates_suppressed = duplicates_;
    r.crypto = totals_;
    r.ledger_active = backend_->ledger_active();
    std::vector<bool> deposits(sim_.node_count, false);
    for (const auto& ident : plan_.identities) deposits[ident.deposit] = true;
    r.distinct_deposits = static_cast<std::size_t>(std::count(deposits.begin(), deposits.end(), true));
    r.forgery_attempts = forgery_attempts_;
    r.forgeries_accepted = forgeries_accepted_;
    r.invalid_signatures_discarded = invalid_discarded_;
    r.max_hop_ms = static_cast<double>(max_hop_) / 1e6;
    r.max_round_trip_ms = static_cast<double>(max_round_trip_) / 1e6;

    out.events_csv_rows = std::move(events_);
    out.signers = std::move(signers_);
    if (options_.export_ledger) out.ledger_lines = backend_->export_ledger();
    return out;
  }

  const SimConfig& sim_;
  NetworkConfig net_;
  BootstrapOptions options_;
  const BootstrapPlan& plan_;
  Overlay overlay_;
  Links links_;
  std::unique_ptr<Backend> backend_;
  std::vector<NodeState> nodes_;
  std::vector<CandidateState> candidates_;
  std::vector<std::vector<std::uint32_t>> signers_;
  std::vector<Announcement> announcements_;
  std::vector<bool> received_;  // announcement-major
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  SimTime now_ = 0;
  std::size_t honest_nodes_ = 0;
  std::size_t threshold_ = 0;
  std::size_t bitvector_bytes_ = 0;

  OpTotals totals_;
  std::uint64_t messages_ = 0;
  std::uint64_t duplicates_ = 0;
  std::uint64_t direct_total_ = 0;
  std::uint64_t invalid_discarded_ = 0;
  std::size_t forgery_attempts_ = 0;
  std::size_t forgeries_accepted_ = 0;
  SimTime max_hop_ = 0;
  SimTime max_round_trip_ = 0;
  std::map<std::string, std::size_t> failure_reasons_;
  std::vector<std::string> events_;
};

}  // namespace

BootstrapResult run_plan(const SimConfig& sim, const NetworkConfig& net, const BootstrapPlan& plan,
                         const BootstrapOptions& options) {
  sim.validate();
  net.validate();
  if (plan.node_kind.size() != sim.node_count) throw Error(ErrorCode::ConfigInvalid, "plan does not match node_count");
  Engine engine(sim, net, options, plan);
  return engine.run();
}

BootstrapResult run_bootstrap(const SimConfig& sim, const NetworkConfig& net, const BootstrapOptions& options) {
  net.validate();
  return run_plan(sim, net, plan_bootstrap(sim), options);
}

nlohmann::json BootstrapReport::to_json() const {
  using nlohmann::json;
  json reasons = json::object();
  for (const auto& [k, v] : failure_reasons) reasons[k] = v;
  return json{
      {"nodes", nodes},
      {"identities", identities},
      {"endorsement_nodes", endorsement_nodes},
      {"stress_run", stress_run},
      {"completion_time_s", completion_time_s},
      {"per_node_times_s", per_node_times_s},
      {"per_node_summary",
       {{"min", per_node_summary.min},
        {"p50", per_node_summary.p50},
        {"p90", per_node_summary.p90},
        {"max", per_node_summary.max},
        {"mean", per_node_summary.mean}}},
      {"finalized", finalized},
      {"failed_candidates", {{"count", failed_candidates}, {"reasons", reasons}}},
      {"messages",
       {{"total", messages_total},
        {"per_node_max", messages_per_node_max},
        {"per_node_mean", messages_per_node_mean},
        {"duplicates_suppressed", duplicates_suppressed},
        {"max_direct_per_candidate", max_direct_per_candidate},
        {"direct_total", direct_total},
        {"direct_expected", direct_expected}}},
      {"crypto_op_counts",
       {{"signs", crypto.signs},
        {"signature_verifications", crypto.signature_verifications},
        {"announcement_verifications", crypto.announcement_verifications},
        {"pairings", crypto.ops.pairings},
        {"exponentiations", crypto.ops.exponentiations},
        {"hashes", crypto.ops.hashes},
        {"work_units", crypto.work_units}}},
      {"ledger",
       {{"active_records", ledger_active},
        {"distinct_deposits", distinct_deposits},
        {"forgery_attempts", forgery_attempts},
        {"forgeries_accepted", forgeries_accepted}}},
      {"invalid_signatures_discarded", invalid_signatures_discarded},
      {"delivery",
       {{"max_hop_ms", max_hop_ms}, {"max_round_trip_ms", max_round_trip_ms}, {"honest_unreached", honest_unreached}}},
      {"conformant_stalled", conformant_stalled},
  };
}

}  // namespace endorse::simulator
